//! Grids `[a_1] x ... x [a_d]`, cells, axis-aligned cubes and infected-cell
//! configurations.
//!
//! Axes are 0-based in code. Cells are indexed row-major with axis 0 slowest,
//! so `index = sum_i c_i * stride_i` with the last axis having stride 1.

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of cells a [`GridShape`] may have.
pub const MAX_CELLS: u64 = 1 << 34;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GridShape {
    sides: Vec<usize>,
    strides: Vec<usize>,
    cells: usize,
}

impl GridShape {
    pub fn new(sides: Vec<usize>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidShape("a grid needs at least one axis".into()));
        }
        if let Some(i) = sides.iter().position(|&s| s == 0) {
            return Err(Error::InvalidShape(format!("axis {i} has side 0")));
        }
        let mut cells: u128 = 1;
        for &s in &sides {
            cells = cells.saturating_mul(s as u128);
        }
        if cells > MAX_CELLS as u128 || cells > usize::MAX as u128 {
            return Err(Error::ShapeTooLarge {
                cells,
                limit: MAX_CELLS,
            });
        }
        let mut strides = vec![1usize; sides.len()];
        for i in (0..sides.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sides[i + 1];
        }
        Ok(Self {
            sides,
            strides,
            cells: cells as usize,
        })
    }

    /// `[n]^d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![n; d])
    }

    /// `[2]^d`.
    pub fn hypercube(d: usize) -> Result<Self> {
        Self::uniform(2, d)
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    pub fn side(&self, axis: usize) -> usize {
        self.sides[axis]
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    /// Common side length if all sides agree.
    pub fn uniform_side(&self) -> Option<usize> {
        let n = self.sides[0];
        self.sides.iter().all(|&s| s == n).then_some(n)
    }

    pub fn full_cube(&self) -> Cube {
        Cube {
            lo: vec![0; self.dim()],
            hi: self.sides.iter().map(|s| s - 1).collect(),
        }
    }

    pub fn contains(&self, coords: &[usize]) -> bool {
        coords.len() == self.dim() && coords.iter().zip(&self.sides).all(|(c, s)| c < s)
    }

    pub fn contains_cube(&self, q: &Cube) -> bool {
        self.contains(&q.hi) && q.lo.len() == self.dim()
    }

    pub fn index_of(&self, cell: &Cell) -> Result<usize> {
        if !self.contains(&cell.0) {
            return Err(Error::CellOutOfRange(cell.to_string()));
        }
        Ok(self.index(&cell.0))
    }

    /// Row-major index of in-range coordinates.
    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert!(self.contains(coords));
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn coord(&self, index: usize, axis: usize) -> usize {
        (index / self.strides[axis]) % self.sides[axis]
    }

    pub fn coords_into(&self, index: usize, out: &mut [usize]) {
        for (axis, o) in out.iter_mut().enumerate() {
            *o = self.coord(index, axis);
        }
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let mut c = vec![0; self.dim()];
        self.coords_into(index, &mut c);
        Cell(c)
    }

    /// Calls `f` with the index of every grid neighbour of `index`.
    #[inline]
    pub fn for_each_neighbour(&self, index: usize, mut f: impl FnMut(usize)) {
        for axis in 0..self.sides.len() {
            let stride = self.strides[axis];
            let c = (index / stride) % self.sides[axis];
            if c > 0 {
                f(index - stride);
            }
            if c + 1 < self.sides[axis] {
                f(index + stride);
            }
        }
    }

    /// Indices of the cells of `q`, in increasing order.
    pub fn cube_indices(&self, q: &Cube) -> Vec<usize> {
        let mut out = Vec::with_capacity(q.cell_count().min(1 << 24) as usize);
        for_each_cube_cell(q, |c| out.push(self.index(c)));
        out
    }
}

impl TryFrom<Vec<usize>> for GridShape {
    type Error = Error;
    fn try_from(sides: Vec<usize>) -> Result<Self> {
        Self::new(sides)
    }
}

impl From<GridShape> for Vec<usize> {
    fn from(s: GridShape) -> Self {
        s.sides
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sides.iter().map(|s| format!("[{s}]")).collect();
        f.write_str(&parts.join("x"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(pub Vec<usize>);

impl Cell {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for Cell {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("cell `{s}` is not of the form (c1,...,cd)")))?;
        let coords = inner
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("cell `{s}`: {e}")))?;
        Ok(Cell(coords))
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl Cube {
    pub fn new(lo: Vec<usize>, hi: Vec<usize>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::InvalidCube(format!(
                "corners have {} and {} coordinates",
                lo.len(),
                hi.len()
            )));
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
            return Err(Error::InvalidCube(format!(
                "lo > hi on axis {i} ({} > {})",
                lo[i], hi[i]
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(coords: &[usize]) -> Self {
        Self {
            lo: coords.to_vec(),
            hi: coords.to_vec(),
        }
    }

    pub fn lo(&self) -> &[usize] {
        &self.lo
    }

    pub fn hi(&self) -> &[usize] {
        &self.hi
    }

    /// Number of axes of the ambient grid.
    pub fn axes(&self) -> usize {
        self.lo.len()
    }

    /// `sum_i (hi_i - lo_i)`.
    pub fn dim(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).sum()
    }

    pub fn is_free(&self, axis: usize) -> bool {
        self.hi[axis] > self.lo[axis]
    }

    pub fn free_axes(&self) -> Vec<usize> {
        (0..self.axes()).filter(|&a| self.is_free(a)).collect()
    }

    /// Every side has at most two values, so the cube is a copy of `[2]^dim`.
    pub fn is_hypercube(&self) -> bool {
        self.lo.iter().zip(&self.hi).all(|(l, h)| h - l <= 1)
    }

    pub fn cell_count(&self) -> u128 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l + 1) as u128).product()
    }

    pub fn contains(&self, coords: &[usize]) -> bool {
        coords.len() == self.axes()
            && coords
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(c, (l, h))| l <= c && c <= h)
    }

    pub fn contains_cube(&self, other: &Cube) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    /// Graph distance: sum over axes of the gap between the two intervals.
    pub fn distance(&self, other: &Cube) -> usize {
        debug_assert_eq!(self.axes(), other.axes());
        (0..self.axes())
            .map(|i| interval_gap(self.lo[i], self.hi[i], other.lo[i], other.hi[i]))
            .sum()
    }

    /// Smallest cube containing both.
    pub fn span(&self, other: &Cube) -> Cube {
        debug_assert_eq!(self.axes(), other.axes());
        Cube {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| *a.min(b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| *a.max(b)).collect(),
        }
    }

    /// The `{0,1,*}` pattern of a cube inside `[2]^d`, if it is one.
    pub fn pattern(&self) -> Option<String> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| match (l, h) {
                (0, 0) => Some('0'),
                (1, 1) => Some('1'),
                (0, 1) => Some('*'),
                _ => None,
            })
            .collect()
    }

    /// Parses a `{0,1,*}` pattern into a cube of `[2]^d`.
    pub fn from_pattern(pattern: &str) -> Result<Self> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for ch in pattern.chars() {
            let (l, h) = match ch {
                '0' => (0, 0),
                '1' => (1, 1),
                '*' => (0, 1),
                _ => return Err(Error::Parse(format!("bad pattern character `{ch}`"))),
            };
            lo.push(l);
            hi.push(h);
        }
        Self::new(lo, hi)
    }
}

fn interval_gap(alo: usize, ahi: usize, blo: usize, bhi: usize) -> usize {
    blo.checked_sub(ahi).or_else(|| alo.checked_sub(bhi)).unwrap_or(0)
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lo.iter().zip(&self.hi).map(|(l, h)| format!("{l}..{h}")).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for Cube {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("cube `{s}` is not of the form (lo..hi,...)")))?;
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for part in inner.split(',') {
            let (l, h) = part
                .trim()
                .split_once("..")
                .ok_or_else(|| Error::Parse(format!("cube axis `{part}` lacks `..`")))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("cube `{s}`: {e}")))
            };
            lo.push(parse(l)?);
            hi.push(parse(h)?);
        }
        Cube::new(lo, hi)
    }
}

impl Serialize for Cube {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cube {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Visits the coordinates of every cell of `q` in row-major order.
pub fn for_each_cube_cell(q: &Cube, mut f: impl FnMut(&[usize])) {
    let mut c = q.lo.clone();
    loop {
        f(&c);
        let mut axis = c.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if c[axis] < q.hi[axis] {
                c[axis] += 1;
                break;
            }
            c[axis] = q.lo[axis];
        }
    }
}

fn check_axes(a: &Cube, b: &Cube) -> Result<()> {
    if a.axes() != b.axes() {
        return Err(Error::ShapeMismatch(format!(
            "cubes {a} and {b} live in grids with different numbers of axes"
        )));
    }
    Ok(())
}

pub fn cube_dim(q: &Cube) -> usize {
    q.dim()
}

/// `Δ(b, c)` (axes where both cubes are constant with different values) and
/// the graph distance between the cubes.
pub fn cube_delta_and_distance(b: &Cube, c: &Cube) -> Result<(Vec<usize>, usize)> {
    check_axes(b, c)?;
    let delta = (0..b.axes())
        .filter(|&i| !b.is_free(i) && !c.is_free(i) && b.lo[i] != c.lo[i])
        .collect();
    Ok((delta, b.distance(c)))
}

pub fn span_union(s: &Cube, t: &Cube) -> Result<Cube> {
    check_axes(s, t)?;
    Ok(s.span(t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyMode {
    /// `Q<axes>`: maximal subcubes on which the given axes are constant.
    ConstantOn,
    /// `Q[axes]`: maximal subcubes on which every other axis is constant.
    ConstantOff,
}

/// Subcube families `Q<axes>` and `Q[axes]` of `q`.
pub fn subcube_family(q: &Cube, axes: &[usize], mode: FamilyMode) -> Result<Vec<Cube>> {
    for &a in axes {
        if a >= q.axes() || !q.is_free(a) {
            return Err(Error::AxisNotFree {
                axis: a,
                cube: q.to_string(),
            });
        }
    }
    let pinned: Vec<usize> = match mode {
        FamilyMode::ConstantOn => {
            let mut v = axes.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        }
        FamilyMode::ConstantOff => q.free_axes().into_iter().filter(|a| !axes.contains(a)).collect(),
    };
    let mut out = Vec::new();
    let mut cur = q.clone();
    for &a in &pinned {
        cur.hi[a] = cur.lo[a];
    }
    loop {
        out.push(cur.clone());
        let mut k = pinned.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            let a = pinned[k];
            if cur.lo[a] < q.hi[a] {
                cur.lo[a] += 1;
                cur.hi[a] = cur.lo[a];
                break;
            }
            cur.lo[a] = q.lo[a];
            cur.hi[a] = q.lo[a];
        }
    }
}

/// A set of cells of a grid, stored as a bit set over row-major indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    shape: GridShape,
    bits: FixedBitSet,
}

impl Configuration {
    pub fn empty(shape: &GridShape) -> Self {
        Self {
            shape: shape.clone(),
            bits: FixedBitSet::with_capacity(shape.cell_count()),
        }
    }

    pub fn full(shape: &GridShape) -> Self {
        let mut c = Self::empty(shape);
        c.bits.insert_range(..);
        c
    }

    pub fn from_cells<'a>(shape: &GridShape, cells: impl IntoIterator<Item = &'a Cell>) -> Result<Self> {
        let mut c = Self::empty(shape);
        for cell in cells {
            c.insert(cell)?;
        }
        Ok(c)
    }

    pub fn from_coords(shape: &GridShape, cells: &[&[usize]]) -> Result<Self> {
        let mut c = Self::empty(shape);
        for coords in cells {
            if !shape.contains(coords) {
                return Err(Error::CellOutOfRange(Cell(coords.to_vec()).to_string()));
            }
            c.insert_index(shape.index(coords));
        }
        Ok(c)
    }

    pub fn from_indices(shape: &GridShape, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut c = Self::empty(shape);
        for i in indices {
            c.insert_index(i);
        }
        c
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn insert(&mut self, cell: &Cell) -> Result<()> {
        let i = self.shape.index_of(cell)?;
        self.bits.insert(i);
        Ok(())
    }

    pub fn insert_index(&mut self, index: usize) {
        self.bits.insert(index);
    }

    pub fn remove_index(&mut self, index: usize) {
        self.bits.set(index, false);
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        self.shape.contains(&cell.0) && self.bits.contains(self.shape.index(&cell.0))
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.bits.is_full()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.bits.ones().map(|i| self.shape.cell_at(i)).collect()
    }

    pub fn is_subset(&self, other: &Configuration) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &Configuration) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn union_with(&mut self, other: &Configuration) {
        self.bits.union_with(&other.bits);
    }

    /// Indices of the members that lie in `q`, in increasing order.
    pub fn indices_in(&self, q: &Cube) -> Vec<usize> {
        let mut c = vec![0; self.shape.dim()];
        self.bits
            .ones()
            .filter(|&i| {
                self.shape.coords_into(i, &mut c);
                q.contains(&c)
            })
            .collect()
    }

    pub fn count_in(&self, q: &Cube) -> usize {
        self.indices_in(q).len()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.cells().iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
