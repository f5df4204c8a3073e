//! Local kernels, boundaries and boundary values on `{-2..2}^d`, one per
//! canonical pair.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{is_canonical_pair, GraphAnswer};
use crate::lattice::{Direction, GridPoint, LexPoints};

/// `f_{d,+}` (`plus = true`) or `f_{d,-}` on `{-1,0,1}^d \ 0`.
pub fn f_base(r: &GridPoint, plus: bool) -> Direction {
    let d = r.dim();
    let k = (1..=d).find(|&i| r.get(i) != 0).expect("f_base is undefined at the origin");
    let sign = -r.get(k).signum() as i8;
    if k < d || plus {
        Direction::new(k, sign)
    } else {
        Direction::new(k, -sign)
    }
}

/// Kernel and boundary values of one local pattern, as offsets from
/// `Ψ(u)`.
#[derive(Debug, Clone, Default)]
pub struct Pattern {
    pub kernel: HashSet<GridPoint>,
    pub boundary: HashMap<GridPoint, Direction>,
}

fn pt(d: usize, terms: &[(Direction, i64)]) -> GridPoint {
    terms.iter().fold(GridPoint::zeros(d), |p, &(s, k)| p.step_by(s, k))
}

/// `K_{d,π}` and the points whose ring defines `B_{d,π}`.
fn kernel_and_core(d: usize, pi: &GraphAnswer) -> (Vec<GridPoint>, Vec<GridPoint>) {
    let ed = Direction::pos(d);
    match (pi.pred, pi.succ) {
        (None, None) => (vec![], vec![]),
        (None, Some(_)) => {
            let core = vec![pt(d, &[]), pt(d, &[(ed, 1)]), pt(d, &[(ed, 2)])];
            let mut k = vec![pt(d, &[(ed, -1)])];
            k.extend(core.iter().copied());
            (k, core)
        }
        (Some(_), None) => {
            let core = vec![pt(d, &[(ed, -2)]), pt(d, &[(ed, -1)]), pt(d, &[])];
            let mut k = core.clone();
            k.push(pt(d, &[(ed, 1)]));
            (k, core)
        }
        (Some(s1), Some(s2)) => {
            let k = vec![pt(d, &[(s1, -2)]), pt(d, &[(s1, -1)]), pt(d, &[]), pt(d, &[(s2, 1)]), pt(d, &[(s2, 2)])];
            (k.clone(), k)
        }
    }
}

/// Points of `{-2..2}^d` outside the kernel at distance 1 from the core.
fn ring(d: usize, kernel: &[GridPoint], core: &[GridPoint]) -> Vec<GridPoint> {
    LexPoints::cube(d, -2, 2)
        .filter(|r| !kernel.contains(r) && core.iter().any(|c| r.sub(c).linf() == 1))
        .collect()
}

fn rotate_left(s: Direction) -> Direction {
    // (x, y) -> (-y, x).
    match (s.axis(), s.sign()) {
        (1, z) => Direction::new(2, z),
        (_, z) => Direction::new(1, -z),
    }
}

/// Two-dimensional values: `+e_1` left of the direction of travel, `-e_1`
/// right of it.
fn values_2d(pi: &GraphAnswer, kernel: &[GridPoint], boundary: &[GridPoint]) -> HashMap<GridPoint, Direction> {
    let (left, right) = (Direction::pos(1), Direction::neg(1));
    let Some(s1) = pi.pred.filter(|_| pi.succ.is_some()) else {
        // Vertical caps: the left side of an upward pipe is `x_1 < 0`.
        return boundary.iter().map(|r| (*r, if r.get(1) < 0 { left } else { right })).collect();
    };
    // The 5-point kernel runs across the box; flood the left component.
    let seed = pt(2, &[(s1, -2), (rotate_left(s1), 1)]);
    let mut seen = HashSet::from([seed]);
    let mut queue = VecDeque::from([seed]);
    while let Some(p) = queue.pop_front() {
        for q in LexPoints::cube(2, -1, 1).map(|o| p.add(&o)) {
            if q.linf() <= 2 && !kernel.contains(&q) && seen.insert(q) {
                queue.push_back(q);
            }
        }
    }
    boundary.iter().map(|r| (*r, if seen.contains(r) { left } else { right })).collect()
}

/// Where an offset from `Ψ(u)` falls in the pattern of `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Kernel,
    Boundary(Direction),
    Outside,
}

const KERNEL: i8 = i8::MAX;

/// All local patterns for dimensions `2..=d`, plus a flat lookup table for
/// dimension `d`.
#[derive(Debug, Clone)]
pub struct Patterns {
    d: usize,
    by_dim: Vec<HashMap<GraphAnswer, Pattern>>,
    /// Indexed by answer, then by the offset in base 5; `0` outside,
    /// [`KERNEL`], or `±axis`.
    flat: Vec<Option<Vec<i8>>>,
}

fn answer_slot(d: usize, a: &GraphAnswer) -> usize {
    let c = |s: Option<Direction>| s.map_or(0, |s| s.code());
    c(a.pred) * (2 * d + 1) + c(a.succ)
}

fn offset_slot(off: &GridPoint) -> usize {
    off.coords().iter().fold(0, |acc, &c| acc * 5 + (c + 2) as usize)
}

fn all_pairs(d: usize) -> Vec<GraphAnswer> {
    let opts: Vec<Option<Direction>> = std::iter::once(None).chain(Direction::all(d).map(Some)).collect();
    opts.iter()
        .flat_map(|a| opts.iter().map(move |b| GraphAnswer::new(*a, *b)))
        .filter(|p| is_canonical_pair(d, p))
        .collect()
}

impl Patterns {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidSpec("Brouwer patterns need d >= 2".into()));
        }
        let mut by_dim: Vec<HashMap<GraphAnswer, Pattern>> = vec![HashMap::new(), HashMap::new()];
        for dd in 2..=d {
            let mut map = HashMap::new();
            for pi in all_pairs(dd) {
                let pat = build(dd, &pi, if dd > 2 { Some(&by_dim[dd - 1]) } else { None })?;
                map.insert(pi, pat);
            }
            by_dim.push(map);
        }
        let mut flat = vec![None; (2 * d + 1) * (2 * d + 1)];
        for (pi, pat) in &by_dim[d] {
            let mut t = vec![0i8; 5usize.pow(d as u32)];
            for k in &pat.kernel {
                t[offset_slot(k)] = KERNEL;
            }
            for (r, v) in &pat.boundary {
                t[offset_slot(r)] = v.axis() as i8 * v.sign();
            }
            flat[answer_slot(d, pi)] = Some(t);
        }
        Ok(Patterns { d, by_dim, flat })
    }

    /// Classifies `off` (with `|off|_inf <= 2`) under the pattern of `pi`;
    /// non-canonical answers have no pattern.
    pub fn cell(&self, pi: &GraphAnswer, off: &GridPoint) -> Cell {
        debug_assert!(off.linf() <= 2);
        let Some(t) = &self.flat[answer_slot(self.d, pi)] else { return Cell::Outside };
        match t[offset_slot(off)] {
            0 => Cell::Outside,
            KERNEL => Cell::Kernel,
            v => Cell::Boundary(Direction::new(v.unsigned_abs() as usize, v.signum())),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, pi: &GraphAnswer) -> Option<&Pattern> {
        self.by_dim[self.d].get(pi)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&GraphAnswer, &Pattern)> {
        self.by_dim[self.d].iter()
    }
}

fn build(d: usize, pi: &GraphAnswer, lower: Option<&HashMap<GraphAnswer, Pattern>>) -> Result<Pattern> {
    let (kernel, core) = kernel_and_core(d, pi);
    let boundary = ring(d, &kernel, &core);
    let values = match lower {
        None => values_2d(pi, &kernel, &boundary),
        Some(lower) => {
            let mut m = HashMap::new();
            for r in &boundary {
                let v = value_recursive(d, pi, r, lower).ok_or_else(|| {
                    Error::InvalidInstance(format!("no local value for {r} under {pi} in dimension {d}"))
                })?;
                m.insert(*r, v);
            }
            m
        }
    };
    Ok(Pattern { kernel: kernel.into_iter().collect(), boundary: values })
}

/// `f_{d,π}(r)` for `d >= 3`, following the case split on how the pair
/// meets axis `d`.
fn value_recursive(d: usize, pi: &GraphAnswer, r: &GridPoint, lower: &HashMap<GraphAnswer, Pattern>) -> Option<Direction> {
    let ed = Direction::pos(d);
    let top = Direction::pos(d - 1);
    let (up, down) = (top, top.opposite());
    let dr = r.drop_last();
    let rd = r.get(d);
    let on_d = |s: Option<Direction>| s.is_some_and(|s| s.axis() == d);
    let lower_eval = |pi2: &GraphAnswer| -> Option<Direction> {
        let p = lower.get(pi2)?;
        if let Some(v) = p.boundary.get(&dr) {
            return Some(*v);
        }
        if p.kernel.contains(&dr) {
            return match rd {
                -1 => Some(down),
                1 => Some(up),
                _ => None,
            };
        }
        None
    };
    let base = |plus: bool| (!dr.is_zero()).then(|| f_base(&dr, plus));

    // Moving along ±e_d.
    let plus_pairs = [
        GraphAnswer::new(Some(ed), Some(ed)),
        GraphAnswer::new(None, Some(ed)),
        GraphAnswer::new(Some(ed), None),
    ];
    if plus_pairs.contains(pi) {
        return base(true);
    }
    if *pi == GraphAnswer::new(Some(ed.opposite()), Some(ed.opposite())) {
        return base(false);
    }
    // Moving within the lower-dimensional space.
    if !on_d(pi.pred) && !on_d(pi.succ) {
        return lower_eval(pi);
    }
    // Turning between e_{d-1} and ±e_d.
    let e = |terms: &[(Direction, i64)]| pt(d, terms);
    let (pi2, far_row, far_plus, special, special_val) = match (pi.pred, pi.succ) {
        (Some(a), Some(b)) if a == top && b == ed => {
            (GraphAnswer::new(Some(top), None), 2, true, [e(&[(top, 1), (ed, 1)]), e(&[(top, 1)])], down)
        }
        (Some(a), Some(b)) if a == ed.opposite() && b == top => {
            (GraphAnswer::new(None, Some(top)), 2, false, [e(&[(top, -1), (ed, 1)]), e(&[(top, -1)])], down)
        }
        (Some(a), Some(b)) if a == top && b == ed.opposite() => {
            (GraphAnswer::new(Some(top), None), -2, false, [e(&[(top, 1)]), e(&[(top, 1), (ed, -1)])], up)
        }
        (Some(a), Some(b)) if a == ed && b == top => {
            (GraphAnswer::new(None, Some(top)), -2, true, [e(&[(top, -1)]), e(&[(top, -1), (ed, -1)])], up)
        }
        _ => return None,
    };
    if rd == far_row {
        return base(far_plus);
    }
    if special.contains(r) {
        return Some(special_val);
    }
    lower_eval(&pi2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp_violations(vals: &HashMap<GridPoint, Direction>) -> Vec<(GridPoint, GridPoint)> {
        let mut out = Vec::new();
        for (a, va) in vals {
            for (b, vb) in vals {
                if a.sub(b).linf() == 1 && *va == vb.opposite() {
                    out.push((*a, *b));
                }
            }
        }
        out
    }

    #[test]
    fn base_functions_are_direction_preserving() {
        for d in 2..=5 {
            for plus in [true, false] {
                let vals: HashMap<GridPoint, Direction> =
                    LexPoints::cube(d, -1, 1).filter(|r| !r.is_zero()).map(|r| (r, f_base(&r, plus))).collect();
                assert!(dp_violations(&vals).is_empty(), "d={d} plus={plus}");
            }
        }
    }

    #[test]
    fn every_pattern_is_total_and_direction_preserving() {
        for d in 2..=5 {
            let p = Patterns::new(d).unwrap();
            for (pi, pat) in p.pairs() {
                assert!(dp_violations(&pat.boundary).is_empty(), "d={d} {pi}: {:?}", dp_violations(&pat.boundary));
                assert!(pat.boundary.values().all(|v| v.axis() < d), "d={d} {pi}");
                assert!(pat.boundary.keys().all(|r| !pat.kernel.contains(r)));
            }
        }
    }

    /// Neighbouring patches agree on their shared face.
    #[test]
    fn patch_identity() {
        for d in 2..=5 {
            let p = Patterns::new(d).unwrap();
            for (pi1, pat1) in p.pairs() {
                for (pi2, pat2) in p.pairs() {
                    let (Some(s), Some(t)) = (pi1.succ, pi2.pred) else { continue };
                    if s != t {
                        continue;
                    }
                    let (k, b) = (s.axis(), s.sign() as i64);
                    let shift = s.to_point(d).scale(4);
                    let mut face1: Vec<(GridPoint, Direction)> =
                        pat1.boundary.iter().filter(|(r, _)| r.get(k) == 2 * b).map(|(r, v)| (*r, *v)).collect();
                    let mut face2: Vec<(GridPoint, Direction)> = pat2
                        .boundary
                        .iter()
                        .filter(|(r, _)| r.get(k) == -2 * b)
                        .map(|(r, v)| (r.add(&shift), *v))
                        .collect();
                    face1.sort_by_key(|(r, _)| r.coords().to_vec());
                    face2.sort_by_key(|(r, _)| r.coords().to_vec());
                    assert_eq!(face1, face2, "d={d} {pi1} then {pi2}");
                }
            }
        }
    }

    #[test]
    fn flat_table_agrees_with_sets() {
        for d in 2..=4 {
            let p = Patterns::new(d).unwrap();
            for (pi, pat) in p.pairs() {
                for r in LexPoints::cube(d, -2, 2) {
                    let want = if pat.kernel.contains(&r) {
                        Cell::Kernel
                    } else {
                        pat.boundary.get(&r).map_or(Cell::Outside, |v| Cell::Boundary(*v))
                    };
                    assert_eq!(p.cell(pi, &r), want, "d={d} {pi} {r}");
                }
            }
        }
    }

    #[test]
    fn start_cap_matches_base() {
        for d in 2..=5 {
            let p = Patterns::new(d).unwrap();
            let ed = Direction::pos(d);
            for pi in [GraphAnswer::new(None, Some(ed)), GraphAnswer::new(Some(ed), None)] {
                let pat = p.get(&pi).unwrap();
                for r in LexPoints::cube(d, -1, 1).filter(|r| !r.is_zero() && r.drop_last().linf() > 0) {
                    assert_eq!(pat.boundary.get(&r), Some(&f_base(&r, true)), "d={d} {pi} at {r}");
                    assert_eq!(f_base(&r, true), f_base(&r, false));
                }
            }
        }
    }
}
