//! Lattice geometry shared by every layer: points of `Z_n^d`, principal unit
//! directions, the infinity norm and lexicographic order.
//!
//! Points are stored inline (no heap) because the Brouwer audits evaluate
//! tens of millions of them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// A point of the integer lattice `Z^d`, `1 <= d <= MAX_DIM`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    len: u8,
    c: [i64; MAX_DIM],
}

impl GridPoint {
    pub fn new(coords: &[i64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "dimension {} outside [1, {MAX_DIM}]",
            coords.len()
        );
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        GridPoint { len: coords.len() as u8, c }
    }

    pub fn zeros(d: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&d), "dimension {d} outside [1, {MAX_DIM}]");
        GridPoint { len: d as u8, c: [0; MAX_DIM] }
    }

    /// The constant point `(v, ..., v)`.
    pub fn splat(d: usize, v: i64) -> Self {
        let mut p = Self::zeros(d);
        p.c[..d].iter_mut().for_each(|x| *x = v);
        p
    }

    pub fn dim(&self) -> usize {
        self.len as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.c[..self.len as usize]
    }

    pub fn coords_mut(&mut self) -> &mut [i64] {
        &mut self.c[..self.len as usize]
    }

    /// Coordinate on a 1-based axis, matching the `r_k` notation.
    pub fn get(&self, axis: usize) -> i64 {
        self.coords()[axis - 1]
    }

    pub fn set(&mut self, axis: usize, v: i64) {
        self.coords_mut()[axis - 1] = v;
    }

    pub fn add(&self, o: &GridPoint) -> GridPoint {
        debug_assert_eq!(self.len, o.len);
        let mut r = *self;
        for i in 0..self.dim() {
            r.c[i] += o.c[i];
        }
        r
    }

    pub fn sub(&self, o: &GridPoint) -> GridPoint {
        debug_assert_eq!(self.len, o.len);
        let mut r = *self;
        for i in 0..self.dim() {
            r.c[i] -= o.c[i];
        }
        r
    }

    pub fn scale(&self, k: i64) -> GridPoint {
        let mut r = *self;
        r.coords_mut().iter_mut().for_each(|x| *x *= k);
        r
    }

    /// Componentwise `k * p + offset`, with overflow reported as an error.
    pub fn affine(&self, k: i64, offset: i64) -> Result<GridPoint> {
        let mut r = *self;
        for x in r.coords_mut() {
            *x = x
                .checked_mul(k)
                .and_then(|y| y.checked_add(offset))
                .ok_or(Error::Overflow)?;
        }
        Ok(r)
    }

    /// Checked variant of [`GridPoint::add`].
    pub fn checked_add(&self, o: &GridPoint) -> Result<GridPoint> {
        if self.len != o.len {
            return Err(Error::DimensionMismatch(self.dim(), o.dim()));
        }
        let mut r = *self;
        for i in 0..self.dim() {
            r.c[i] = r.c[i].checked_add(o.c[i]).ok_or(Error::Overflow)?;
        }
        Ok(r)
    }

    pub fn step(&self, s: Direction) -> GridPoint {
        let mut r = *self;
        r.c[s.axis() - 1] += s.sign() as i64;
        r
    }

    /// `p + k * s`.
    pub fn step_by(&self, s: Direction, k: i64) -> GridPoint {
        let mut r = *self;
        r.c[s.axis() - 1] += k * s.sign() as i64;
        r
    }

    pub fn linf(&self) -> i64 {
        self.coords().iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&x| x == 0)
    }

    /// Drops the last coordinate (the map `D`).
    pub fn drop_last(&self) -> GridPoint {
        assert!(self.len > 1, "cannot drop the only coordinate");
        let mut r = *self;
        r.len -= 1;
        r.c[r.len as usize] = 0;
        r
    }

    /// Appends a coordinate (the maps `U` and `U_k`).
    pub fn push(&self, v: i64) -> GridPoint {
        assert!((self.len as usize) < MAX_DIM, "dimension limit reached");
        let mut r = *self;
        r.c[r.len as usize] = v;
        r.len += 1;
        r
    }

    /// If `self` is a principal unit vector, returns it as a direction.
    pub fn as_direction(&self) -> Option<Direction> {
        let mut found = None;
        for (i, &x) in self.coords().iter().enumerate() {
            match x {
                0 => {}
                1 | -1 if found.is_none() => found = Some(Direction::new(i + 1, x as i8)),
                _ => return None,
            }
        }
        found
    }

    /// Every coordinate lies in `[1, n]`.
    pub fn in_grid(&self, n: i64) -> bool {
        self.coords().iter().all(|&x| (1..=n).contains(&x))
    }
}

impl fmt::Debug for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for GridPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("point must be parenthesized: {s:?}")))?;
        let coords = inner
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::Parse(format!("bad dimension in {s:?}")));
        }
        Ok(GridPoint::new(&coords))
    }
}

impl Serialize for GridPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GridPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Signed principal unit vector `±e_axis` (1-based axis).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction {
    axis: u8,
    sign: i8,
}

impl Direction {
    pub fn new(axis: usize, sign: i8) -> Self {
        assert!((1..=MAX_DIM).contains(&axis), "axis {axis} out of range");
        assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
        Direction { axis: axis as u8, sign }
    }

    /// `+e_axis`.
    pub fn pos(axis: usize) -> Self {
        Self::new(axis, 1)
    }

    /// `-e_axis`.
    pub fn neg(axis: usize) -> Self {
        Self::new(axis, -1)
    }

    pub fn axis(&self) -> usize {
        self.axis as usize
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn opposite(&self) -> Self {
        Direction { axis: self.axis, sign: -self.sign }
    }

    pub fn to_point(&self, d: usize) -> GridPoint {
        GridPoint::zeros(d).step(*self)
    }

    /// `1..=2d` in the order of [`Direction::all`].
    pub fn code(&self) -> usize {
        2 * (self.axis as usize - 1) + usize::from(self.sign > 0) + 1
    }

    pub fn from_code(c: usize) -> Self {
        Direction::new((c - 1) / 2 + 1, if (c - 1) % 2 == 1 { 1 } else { -1 })
    }

    /// All `2d` directions, axis ascending, `-` before `+`.
    pub fn all(d: usize) -> impl Iterator<Item = Direction> {
        (1..=d).flat_map(|a| [Direction::neg(a), Direction::pos(a)])
    }

    /// Lexicographic order of the expanded vectors.
    ///
    /// For `+e_i` vs `+e_j` with `i < j` the larger vector is `+e_i`;
    /// for `-e_i` vs `-e_j` it is `-e_j`.
    pub fn lex_cmp(&self, o: &Direction) -> Ordering {
        if self == o {
            return Ordering::Equal;
        }
        if self.axis == o.axis {
            return self.sign.cmp(&o.sign);
        }
        // First differing coordinate is the smaller axis.
        if self.axis < o.axis {
            if self.sign > 0 { Ordering::Greater } else { Ordering::Less }
        } else if o.sign > 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign > 0 { '+' } else { '-' };
        write!(f, "{s}e{}", self.axis)
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (sign, rest) = match t.chars().next() {
            Some('+') => (1, &t[1..]),
            Some('-') => (-1, &t[1..]),
            _ => return Err(Error::Parse(format!("direction needs a sign: {s:?}"))),
        };
        let axis: usize = rest
            .strip_prefix('e')
            .and_then(|a| a.parse().ok())
            .filter(|a| (1..=MAX_DIM).contains(a))
            .ok_or_else(|| Error::Parse(format!("bad direction {s:?}")))?;
        Ok(Direction::new(axis, sign))
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The grid `Z_n^d = [1, n]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub n: i64,
}

impl GridSpec {
    pub fn new(d: usize, n: i64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) || n < 1 {
            return Err(Error::InvalidSpec(format!("grid d={d} n={n}")));
        }
        Ok(GridSpec { d, n })
    }

    pub fn contains(&self, p: &GridPoint) -> bool {
        p.dim() == self.d && p.in_grid(self.n)
    }

    /// Number of lattice points, `None` on overflow.
    pub fn cells(&self) -> Option<u64> {
        (self.n as u64).checked_pow(self.d as u32)
    }

    /// Position of `p` in [`GridSpec::points`] order; `p` must be in the grid.
    pub fn rank(&self, p: &GridPoint) -> u64 {
        p.coords().iter().fold(0u64, |acc, &c| acc * self.n as u64 + (c - 1) as u64)
    }

    /// Inverse of [`GridSpec::rank`].
    pub fn point_at(&self, mut rank: u64) -> GridPoint {
        let mut p = GridPoint::zeros(self.d);
        for i in (1..=self.d).rev() {
            p.set(i, (rank % self.n as u64) as i64 + 1);
            rank /= self.n as u64;
        }
        p
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> LexPoints {
        LexPoints::new(GridPoint::splat(self.d, 1), self.n)
    }
}

/// Lexicographic enumeration of a box `[lo, lo + side - 1]^d`.
#[derive(Debug, Clone)]
pub struct LexPoints {
    next: Option<GridPoint>,
    lo: i64,
    hi: i64,
}

impl LexPoints {
    fn new(start: GridPoint, n: i64) -> Self {
        LexPoints { next: (n >= 1).then_some(start), lo: 1, hi: n }
    }

    /// Enumerates `[lo, hi]^d`.
    pub fn cube(d: usize, lo: i64, hi: i64) -> Self {
        LexPoints { next: (hi >= lo).then(|| GridPoint::splat(d, lo)), lo, hi }
    }
}

impl Iterator for LexPoints {
    type Item = GridPoint;

    fn next(&mut self) -> Option<GridPoint> {
        let cur = self.next?;
        let mut nxt = cur;
        let d = nxt.dim();
        let mut i = d;
        loop {
            if i == 0 {
                self.next = None;
                break;
            }
            i -= 1;
            if nxt.c[i] < self.hi {
                nxt.c[i] += 1;
                self.next = Some(nxt);
                break;
            }
            nxt.c[i] = self.lo;
        }
        Some(cur)
    }
}

/// Lexicographic comparison of two points.
pub fn lex_cmp(a: &GridPoint, b: &GridPoint) -> Result<Ordering> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.coords().cmp(b.coords()))
}

/// `max_i |a_i - b_i|`.
pub fn linf_dist(a: &GridPoint, b: &GridPoint) -> Result<i64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs()).max().unwrap_or(0))
}

/// `p + s`; callers check bounds.
pub fn step(p: &GridPoint, s: Direction) -> GridPoint {
    p.step(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn codes_and_ranks_follow_enumeration_order() {
        for (i, s) in Direction::all(4).enumerate() {
            assert_eq!(s.code(), i + 1);
            assert_eq!(Direction::from_code(s.code()), s);
        }
        let spec = GridSpec::new(3, 4).unwrap();
        for (i, p) in spec.points().enumerate() {
            assert_eq!(spec.rank(&p), i as u64);
            assert_eq!(spec.point_at(i as u64), p);
        }
    }

    fn pt(c: &[i64]) -> GridPoint {
        GridPoint::new(c)
    }

    #[test]
    fn lex_examples() {
        assert_eq!(lex_cmp(&pt(&[1, 2]), &pt(&[1, 3])).unwrap(), Ordering::Less);
        assert_eq!(lex_cmp(&pt(&[2, 1]), &pt(&[1, 9])).unwrap(), Ordering::Greater);
        assert_eq!(lex_cmp(&pt(&[4, 4]), &pt(&[4, 4])).unwrap(), Ordering::Equal);
        assert!(lex_cmp(&pt(&[1]), &pt(&[1, 2])).is_err());
    }

    #[test]
    fn linf_examples() {
        assert_eq!(linf_dist(&pt(&[1, 1]), &pt(&[2, 3])).unwrap(), 2);
        assert_eq!(linf_dist(&pt(&[5, 5]), &pt(&[5, 5])).unwrap(), 0);
        assert_eq!(linf_dist(&pt(&[1, 4, 2]), &pt(&[3, 4, 1])).unwrap(), 2);
    }

    #[test]
    fn step_examples() {
        assert_eq!(step(&pt(&[1, 1]), Direction::pos(2)), pt(&[1, 2]));
        assert_eq!(step(&pt(&[3, 3]), Direction::neg(1)), pt(&[2, 3]));
        assert_eq!(step(&pt(&[1, 1, 1]), Direction::pos(3)), pt(&[1, 1, 2]));
    }

    #[test]
    fn direction_lex_matches_vector_lex() {
        for d in 1..=4 {
            for a in Direction::all(d) {
                for b in Direction::all(d) {
                    let expect = a.to_point(d).coords().cmp(b.to_point(d).coords());
                    assert_eq!(a.lex_cmp(&b), expect, "{a} vs {b}");
                }
            }
        }
        // e_2 = (0,1) precedes e_1 = (1,0).
        assert_eq!(Direction::pos(2).lex_cmp(&Direction::pos(1)), Ordering::Less);
    }

    #[test]
    fn text_round_trip() {
        let p = pt(&[1, -2, 3]);
        assert_eq!(p.to_string(), "(1,-2,3)");
        assert_eq!("(1,-2,3)".parse::<GridPoint>().unwrap(), p);
        assert_eq!(Direction::neg(1).to_string(), "-e1");
        assert_eq!("+e3".parse::<Direction>().unwrap(), Direction::pos(3));
        assert!("e3".parse::<Direction>().is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<GridPoint>(&json).unwrap(), p);
    }

    #[test]
    fn lex_points_enumerates_in_order() {
        let pts: Vec<_> = GridSpec::new(2, 3).unwrap().points().collect();
        assert_eq!(pts.len(), 9);
        assert!(pts.windows(2).all(|w| w[0].coords() < w[1].coords()));
        assert_eq!(LexPoints::cube(3, -1, 1).count(), 27);
    }

    #[test]
    fn affine_overflow_is_checked() {
        assert!(pt(&[i64::MAX / 2]).affine(4, 0).is_err());
        assert_eq!(pt(&[2, 3]).affine(4, -1).unwrap(), pt(&[7, 11]));
    }

    fn arb_point(d: usize) -> impl Strategy<Value = GridPoint> {
        proptest::collection::vec(-50i64..50, d).prop_map(|v| GridPoint::new(&v))
    }

    proptest! {
        #[test]
        fn lex_is_total_order((a, b, c) in (1usize..5).prop_flat_map(|d| (arb_point(d), arb_point(d), arb_point(d)))) {
            let ab = lex_cmp(&a, &b).unwrap();
            prop_assert_eq!(ab.reverse(), lex_cmp(&b, &a).unwrap());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
            if ab != Ordering::Greater && lex_cmp(&b, &c).unwrap() != Ordering::Greater {
                prop_assert_ne!(lex_cmp(&a, &c).unwrap(), Ordering::Greater);
            }
        }

        #[test]
        fn linf_is_a_metric((a, b, c) in (1usize..5).prop_flat_map(|d| (arb_point(d), arb_point(d), arb_point(d)))) {
            let ab = linf_dist(&a, &b).unwrap();
            prop_assert_eq!(ab, linf_dist(&b, &a).unwrap());
            prop_assert!(linf_dist(&a, &c).unwrap() <= ab + linf_dist(&b, &c).unwrap());
        }

        #[test]
        fn step_inverts((p, axis, pos) in (1usize..5).prop_flat_map(|d| (arb_point(d), 1..=d, any::<bool>()))) {
            let s = if pos { Direction::pos(axis) } else { Direction::neg(axis) };
            prop_assert_eq!(step(&step(&p, s), s.opposite()), p);
        }
    }
}
