use hdbp_core::bootstrap::{
    closure_cubes, closure_set, min_percolating_set, min_percolating_size, percolates, sequential_spanning,
    sequential_spanning_exhaustive, span_decompose, spans,
};
use hdbp_core::exact::{
    g_normalized, g_normalized_sequence, g_recursive, inductive_g_schedule, tech_lemma_eval, LambdaContext,
};
use hdbp_core::lattice::{cube_delta_and_distance, span_union, subcube_family};
use hdbp_core::montecarlo::{sample_configuration, sample_stream};
use hdbp_core::oracle::{binom, hypercube, next_colex, rank_colex, unrank_colex, vertex};
use hdbp_core::{Configuration, Cube, FamilyMode, GridShape};
use proptest::prelude::*;

fn shape_strategy(max_d: usize, max_side: usize) -> impl Strategy<Value = GridShape> {
    prop::collection::vec(1..=max_side, 1..=max_d).prop_map(|s| GridShape::new(s).unwrap())
}

fn cube_in(shape: &GridShape) -> impl Strategy<Value = Cube> {
    let axes: Vec<_> = shape
        .sides()
        .iter()
        .map(|&s| (0..s, 0..s).prop_map(|(a, b)| (a.min(b), a.max(b))))
        .collect();
    axes.prop_map(|iv| {
        let (lo, hi): (Vec<_>, Vec<_>) = iv.into_iter().unzip();
        Cube::new(lo, hi).unwrap()
    })
}

fn shape_and_cubes(n: usize) -> impl Strategy<Value = (GridShape, Vec<Cube>)> {
    shape_strategy(4, 5).prop_flat_map(move |s| {
        let cubes = prop::collection::vec(cube_in(&s), n);
        (Just(s), cubes)
    })
}

fn config_in(shape: GridShape) -> impl Strategy<Value = Configuration> {
    let n = shape.cell_count();
    prop::collection::vec(any::<bool>(), n).prop_map(move |bits| {
        Configuration::from_indices(&shape, bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    })
}

fn small_config() -> impl Strategy<Value = Configuration> {
    shape_strategy(3, 4).prop_flat_map(config_in)
}

/// Sparse configurations on `[2]^d`, where most closures are not the whole cube.
fn sparse_hypercube_config(max_d: usize) -> impl Strategy<Value = Configuration> {
    (1..=max_d).prop_flat_map(|d| {
        let shape = GridShape::hypercube(d).unwrap();
        let n = shape.cell_count();
        prop::collection::btree_set(0..n, 0..=d.max(2)).prop_map(move |set| Configuration::from_indices(&shape, set))
    })
}

fn cells_of(shape: &GridShape, q: &Cube) -> std::collections::BTreeSet<usize> {
    shape.cube_indices(q).into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cell_index_roundtrip(shape in shape_strategy(5, 6)) {
        for i in 0..shape.cell_count() {
            let c = shape.cell_at(i);
            prop_assert_eq!(shape.index_of(&c).unwrap(), i);
        }
    }

    #[test]
    fn distance_symmetric_and_zero_iff_intersecting((shape, qs) in shape_and_cubes(2)) {
        let (s, t) = (&qs[0], &qs[1]);
        let (delta_st, d_st) = cube_delta_and_distance(s, t).unwrap();
        let (delta_ts, d_ts) = cube_delta_and_distance(t, s).unwrap();
        prop_assert_eq!(d_st, d_ts);
        prop_assert_eq!(delta_st, delta_ts);
        let meet = !cells_of(&shape, s).is_disjoint(&cells_of(&shape, t));
        prop_assert_eq!(d_st == 0, meet);
        prop_assert_eq!(cube_delta_and_distance(s, s).unwrap(), (vec![], 0));
    }

    #[test]
    fn distance_is_graph_distance((shape, qs) in shape_and_cubes(2)) {
        // Brute force over cell pairs with L1 distance.
        let (s, t) = (&qs[0], &qs[1]);
        let a = shape.cube_indices(s);
        let b = shape.cube_indices(t);
        let l1 = |x: usize, y: usize| {
            let (cx, cy) = (shape.cell_at(x), shape.cell_at(y));
            cx.coords().iter().zip(cy.coords()).map(|(&u, &v)| u.abs_diff(v)).sum::<usize>()
        };
        let brute = a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).map(|(x, y)| l1(x, y)).min().unwrap();
        prop_assert_eq!(s.distance(t), brute);
    }

    #[test]
    fn span_union_laws((_shape, qs) in shape_and_cubes(3)) {
        let (s, t, u) = (&qs[0], &qs[1], &qs[2]);
        let st = span_union(s, t).unwrap();
        prop_assert_eq!(&st, &span_union(t, s).unwrap());
        prop_assert_eq!(&span_union(s, s).unwrap(), s);
        prop_assert!(st.contains_cube(s) && st.contains_cube(t));
        prop_assert!(st.dim() >= s.dim().max(t.dim()));
        prop_assert_eq!(span_union(&st, u).unwrap(), span_union(s, &span_union(t, u).unwrap()).unwrap());
        if s.contains_cube(t) {
            prop_assert_eq!(&st, s);
        }
    }

    #[test]
    fn pair_family_partitions_binary_cube(d in 2usize..=6, pick in any::<(usize, usize)>()) {
        let q = hypercube(d);
        let j = pick.0 % d;
        let k = (j + 1 + pick.1 % (d - 1)) % d;
        let fam = subcube_family(&q, &[j, k], FamilyMode::ConstantOn).unwrap();
        prop_assert_eq!(fam.len(), 4);
        let shape = GridShape::hypercube(d).unwrap();
        let mut seen = vec![0u8; shape.cell_count()];
        for c in &fam {
            prop_assert_eq!(c.dim(), d - 2);
            for i in shape.cube_indices(c) {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&x| x == 1));
    }

    #[test]
    fn closure_monotone_and_idempotent(a in small_config(), extra in any::<u64>(), r in 1u32..=3) {
        let shape = a.shape().clone();
        let mut b = a.clone();
        for i in 0..shape.cell_count() {
            if (extra >> (i % 64)) & 1 == 1 && i % 3 == 0 {
                b.insert_index(i);
            }
        }
        let ca = closure_set(&a, r);
        let cb = closure_set(&b, r);
        prop_assert!(a.is_subset(&ca));
        prop_assert!(ca.is_subset(&cb));
        prop_assert_eq!(closure_set(&ca, r), ca);
    }

    #[test]
    fn cubes_process_matches_cellwise(a in sparse_hypercube_config(7)) {
        let cubes = closure_cubes(&a);
        prop_assert_eq!(&cubes.infected, &closure_set(&a, 2));
        let mut covered = Configuration::empty(a.shape());
        for q in &cubes.components {
            for i in a.shape().cube_indices(q) {
                prop_assert!(!covered.contains_index(i), "components overlap");
                covered.insert_index(i);
            }
        }
        prop_assert_eq!(covered, cubes.infected);
        for (x, q) in cubes.components.iter().enumerate() {
            for w in &cubes.components[x + 1..] {
                prop_assert!(q.distance(w) > 2);
            }
        }
    }

    #[test]
    fn decomposition_is_disjoint_and_spans(a in sparse_hypercube_config(6)) {
        let q = a.shape().full_cube();
        if q.dim() > 0 && spans(&q, &a) {
            let dec = span_decompose(&q, &a).unwrap();
            prop_assert!(dec.witness_s.is_disjoint(&dec.witness_t));
            prop_assert!(spans(&dec.s, &dec.witness_s) && spans(&dec.t, &dec.witness_t));
            prop_assert_eq!(dec.s.span(&dec.t), q.clone());
            prop_assert!(dec.s.distance(&dec.t) <= 2);
            prop_assert!(dec.s.dim() >= dec.t.dim() && dec.s != q);
        }
    }

    #[test]
    fn greedy_sequential_matches_exhaustive(rank in 0..binom(64, 4)) {
        let shape = GridShape::hypercube(6).unwrap();
        let pts = unrank_colex(rank, 4);
        let coords: Vec<Vec<usize>> = pts.iter().map(|&v| vertex(v, 6)).collect();
        let refs: Vec<&[usize]> = coords.iter().map(|c| c.as_slice()).collect();
        let a = Configuration::from_coords(&shape, &refs).unwrap();
        let q = shape.full_cube();
        let greedy = sequential_spanning(&q, &a);
        prop_assert_eq!(greedy.is_some(), sequential_spanning_exhaustive(&q, &a).is_some());
        if let Some(seq) = greedy {
            prop_assert!(spans(&q, &a));
            for (j, c) in seq.prefix_cubes.iter().enumerate() {
                prop_assert_eq!(c.dim(), 2 * j);
                if j + 1 < seq.order.len() {
                    prop_assert_eq!(c.distance(&Cube::point(seq.order[j + 1].coords())), 2);
                }
            }
        }
    }

    #[test]
    fn colex_roundtrip(k in 1usize..=6, n in 6usize..=20, seed in any::<u64>()) {
        let total = binom(n as u64, k as u64);
        let rank = seed % total;
        let c = unrank_colex(rank, k);
        prop_assert_eq!(rank_colex(&c), rank);
        prop_assert!(c.windows(2).all(|w| w[0] < w[1]) && c[k - 1] < n);
        let mut next = c.clone();
        if next_colex(&mut next, n) {
            prop_assert_eq!(rank_colex(&next), rank + 1);
        } else {
            prop_assert_eq!(rank + 1, total);
        }
    }

    #[test]
    fn minimal_set_percolates(n in 1usize..=6, d in 1usize..=5) {
        let shape = GridShape::uniform(n, d).unwrap();
        let a = min_percolating_set(&shape, 2).unwrap();
        prop_assert_eq!(a.len(), min_percolating_size(&shape));
        prop_assert!(percolates(&a, 2));
    }

    #[test]
    fn coupled_samples_are_monotone(d in 1usize..=8, p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, seed in any::<u64>(), s in 0u64..1000) {
        let (lo, hi) = (p1.min(p2), p1.max(p2));
        let shape = GridShape::hypercube(d).unwrap();
        let a = sample_configuration(&shape, lo, &mut sample_stream(seed, 0, s)).unwrap();
        let b = sample_configuration(&shape, hi, &mut sample_stream(seed, 0, s)).unwrap();
        prop_assert!(a.is_subset(&b));
        prop_assert!(closure_set(&a, 2).is_subset(&closure_set(&b, 2)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tech_lemma_on_admissible_inputs(
        ell in 1usize..=100,
        weights in prop::collection::vec(0.0f64..1.0, 100),
        budget in 0.0f64..=1.0 / 3.0,
        mix in prop::collection::vec(0.0f64..=1.0, 100),
    ) {
        let ctx = LambdaContext::standard();
        let total: f64 = weights[1..ell].iter().sum();
        let g: Vec<f64> = (0..ell)
            .map(|m| if m == 0 || total == 0.0 { 0.0 } else { budget * weights[m] / total })
            .collect();
        let h: Vec<f64> = (0..ell).map(|m| 1.0 + mix[m] * g[m]).collect();
        let run = tech_lemma_eval(ctx, ell, &g, &h).unwrap();
        prop_assert!(run.verdict.holds(), "{:?}", run.verdict);
        prop_assert!(run.recursion_residual < 1e-12);
        prop_assert!(run.rewritten_recursion_gap(ctx) < 1e-9);
    }
}

#[test]
fn g_routes_agree() {
    let ctx = LambdaContext::standard();
    let exact = g_normalized_sequence(ctx, 300);
    let float = g_recursive(ctx, 300);
    for ell in 0..=300 {
        let rel = ((exact[ell] - float[ell]) / exact[ell]).abs();
        assert!(rel < 1e-9, "l = {ell}: {} vs {}", exact[ell], float[ell]);
        if ell % 37 == 0 {
            assert_eq!(g_normalized(ctx, ell), exact[ell]);
        }
    }
}

#[test]
fn inductive_schedule_satisfies_tech_lemma() {
    let ctx = LambdaContext::standard();
    let g = inductive_g_schedule(0.01, 100);
    let h: Vec<f64> = g.iter().map(|x| 1.0 + x).collect();
    assert!(tech_lemma_eval(ctx, 100, &g, &h).unwrap().verdict.holds());
}

#[test]
fn no_small_set_spans_binary_cubes() {
    // At most dim/2 points never span [2]^dim.
    for d in [4usize, 6] {
        let shape = GridShape::hypercube(d).unwrap();
        let q = shape.full_cube();
        for k in 1..=d / 2 {
            let mut c: Vec<usize> = (0..k).collect();
            loop {
                let a = Configuration::from_indices(&shape, c.iter().map(|&v| shape.index(&vertex(v, d))));
                assert!(!spans(&q, &a), "{c:?} spans [2]^{d}");
                if !next_colex(&mut c, 1 << d) {
                    break;
                }
            }
        }
    }
}
