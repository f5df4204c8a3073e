//! Exhaustive per-layer verification suites and the string-file checker.

use std::collections::BTreeMap;

use brouwer_core::brouwer::audit_brouwer;
use brouwer_core::graph::audit::{audit_canonical, audit_generalized, audit_ppad};
use brouwer_core::graph::f_embed_inv;
use brouwer_core::lattice::LexPoints;
use brouwer_core::pipeline::invert_chain;
use brouwer_core::string::{end_d, is_d_non_repeating, string_oracle};
use brouwer_core::toc::{build_q, build_s, nt_embed, Which};
use brouwer_core::{
    BrouwerOracle, Direction, GridPoint, GridSpec, IndexedString, StringOracle, SymbolString, Toc,
};
use serde::Serialize;

use crate::instance::{Built, Descriptor, Instance, LayerSel};
use crate::{flag_name, Fail};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    /// Counterexample coordinates when the check fails.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<GridPoint>,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name,
            pass,
            detail: detail.into(),
            witness: Vec::new(),
        }
    }

    fn witness(mut self, w: impl IntoIterator<Item = GridPoint>) -> Self {
        if !self.pass {
            self.witness.extend(w);
        }
        self
    }

    fn from_result<T>(
        name: &'static str,
        r: brouwer_core::Result<T>,
        ok: impl FnOnce(&T) -> String,
    ) -> (Self, Option<T>) {
        match r {
            Ok(v) => (Check::new(name, true, ok(&v)), Some(v)),
            Err(e) => (Check::new(name, false, e.to_string()), None),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub instance: Descriptor,
    pub layer: LayerSel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub zero_points: Vec<GridPoint>,
    pub query_stats: BTreeMap<&'static str, u64>,
}

pub struct Caps {
    pub max_cells: u64,
}

fn guard(spec: GridSpec, caps: &Caps) -> Result<(), Fail> {
    match spec.cells() {
        Some(c) if c <= caps.max_cells => Ok(()),
        c => Err(Fail::usage(format!(
            "suite needs {} cells on Z_{}^{}, above --max-cells {}",
            c.map_or("too many".to_string(), |c| c.to_string()),
            spec.n,
            spec.d,
            caps.max_cells
        ))),
    }
}

/// Runs the suite for `layer`. `flip` negates the Brouwer value at one
/// point, for fault injection.
pub fn verify(
    desc: &Descriptor,
    layer: LayerSel,
    caps: &Caps,
    flip: Option<GridPoint>,
) -> Result<Report, Fail> {
    let inst = Instance::load(desc)?;
    if !inst.supports(layer) {
        return Err(Fail::usage(format!(
            "layer {} needs a ToC-sourced instance",
            flag_name(&layer)
        )));
    }
    if flip.is_some() && layer != LayerSel::Zp {
        return Err(Fail::usage("--flip only applies to --layer zp"));
    }
    let mut zero_points = Vec::new();
    let mut grid = None;
    let mut stats = BTreeMap::new();
    let checks = match layer {
        LayerSel::Nt => nt_suite(inst.toc().expect("supports() checked the source")),
        _ => {
            let built = inst.build(true)?;
            let before = built.counter().snapshot();
            let spec = match layer {
                LayerSel::Es => {
                    let s = built.strings().expect("ToC source");
                    GridSpec::new(s.window(), s.alphabet())?
                }
                LayerSel::Gp => built.gprime().expect("ToC source").spec(),
                LayerSel::Cgp => built.canonical().spec(),
                _ => built.brouwer().spec(),
            };
            guard(spec, caps)?;
            grid = Some(spec);
            let checks = match layer {
                LayerSel::Es => es_suite(&built, inst.toc().expect("ToC source"))?,
                LayerSel::Gp => gp_suite(&built),
                LayerSel::Cgp => cgp_suite(&built)?,
                _ => {
                    if let Some(p) = flip.filter(|p| !spec.contains(p)) {
                        return Err(Fail::usage(format!(
                            "--flip {p} is outside Z_{}^{}",
                            spec.n, spec.d
                        )));
                    }
                    let (c, zeros) = zp_suite(&built, flip)?;
                    zero_points = zeros;
                    c
                }
            };
            stats = built.counter().snapshot().since(&before).as_map();
            checks
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        instance: desc.clone(),
        layer,
        grid,
        pass,
        checks,
        zero_points,
        query_stats: stats,
    })
}

fn nt_suite(toc: &Toc) -> Vec<Check> {
    let spec = toc.spec();
    let valid = toc.is_valid();
    let mut checks = vec![Check::new(
        "valid",
        valid,
        format!("ToC({}, {})", spec.n, spec.d),
    )];
    if valid {
        let tail = toc.tail();
        let ok = tail.len() == spec.d && tail.iter().all(|&s| spec.is_label(s));
        checks.push(Check::new("tail_is_leaf", ok, format!("{tail:?}")));
    }
    checks
}

fn es_suite(built: &Built, toc: &Toc) -> Result<Vec<Check>, Fail> {
    let oracle = built.strings().expect("ToC source");
    let d = oracle.window();
    let s = build_s(toc)?;
    let mut checks = vec![Check::new(
        "non_repeating",
        is_d_non_repeating(&s, d),
        format!("|S| = {}", s.len()),
    )];
    let head = s.symbols[..d].to_vec();
    let start = oracle.start_window();
    checks.push(Check::new(
        "start_window",
        head == start,
        format!("{head:?}, published {start:?}"),
    ));
    let tail = toc.tail();
    let (c, end) = Check::from_result("end_window", end_d(&s, d), |e| format!("{e:?}"));
    checks.push(c);
    if let Some(end) = end {
        let want = nt_embed(&tail);
        checks.push(Check::new(
            "end_encodes_tail",
            end == want,
            format!("end {end:?}, tail {tail:?} -> {want:?}"),
        ));
    }
    let indexed = IndexedString::new(s, d)?;
    let mut windows = 0u64;
    let mut first_bad = None;
    for w in LexPoints::cube(d, 1, oracle.alphabet()) {
        windows += 1;
        if first_bad.is_none() && oracle.query(w.coords()) != indexed.query(w.coords()) {
            first_bad = Some(w);
        }
    }
    checks.push(
        Check::new(
            "oracle_consistency",
            first_bad.is_none(),
            match first_bad {
                None => format!("{windows} windows agree with the materialized string"),
                Some(w) => format!("window {w} disagrees"),
            },
        )
        .witness(first_bad),
    );
    Ok(checks)
}

/// The `G*` vertex whose `G'` image `4u - 1` is within 1 of `v`.
fn gstar_vertex(v: &GridPoint) -> Option<GridPoint> {
    let mut u = *v;
    for (ui, &vi) in u.coords_mut().iter_mut().zip(v.coords()) {
        *ui = (vi + 2).div_euclid(4);
        if (vi - (4 * *ui - 1)).abs() > 1 {
            return None;
        }
    }
    Some(u)
}

fn gp_suite(built: &Built) -> Vec<Check> {
    let gstar = built.gstar().expect("ToC source");
    let gp = built.gprime().expect("ToC source");
    let (c, _) = Check::from_result("gstar_generalized_ppad", audit_generalized(&gstar), |r| {
        format!(
            "{} edges, max in {}, max out {}",
            r.edges, r.max_in, r.max_out
        )
    });
    let mut checks = vec![c];
    let (c, rep) = Check::from_result("gprime_ppad", audit_ppad(&gp), |r| {
        format!(
            "start {}, end {}, path {} of {} edges",
            r.start, r.end, r.path_len, r.edges
        )
    });
    checks.push(c);
    if let (Some(rep), Some(tail)) = (rep, built.tail()) {
        let block = gstar_vertex(&rep.end).and_then(|u| f_embed_inv(&u));
        let want = nt_embed(&tail);
        checks.push(
            Check::new(
                "end_encodes_tail",
                block.as_ref() == Some(&want),
                format!("{block:?}, tail {tail:?} -> {want:?}"),
            )
            .witness([rep.end]),
        );
    }
    checks
}

fn cgp_suite(built: &Built) -> Result<Vec<Check>, Fail> {
    let g = built.canonical();
    let (c, rep) = Check::from_result("canonical_ppad", audit_canonical(&g), |r| {
        format!(
            "start {}, end {}, path {} of {} edges",
            r.start, r.end, r.path_len, r.edges
        )
    });
    let mut checks = vec![c];
    if let (Some(rep), Some(tail)) = (rep, built.tail()) {
        checks.push(inversion_check(
            &brouwer_core::brouwer::psi(&rep.end),
            &tail,
        ));
    }
    Ok(checks)
}

fn inversion_check(zero: &GridPoint, tail: &[i64]) -> Check {
    match invert_chain(zero) {
        Ok(leaf) => Check::new(
            "inverts_to_tail",
            leaf == tail,
            format!("{zero} -> {leaf:?}, tail {tail:?}"),
        )
        .witness([*zero]),
        Err(e) => Check::new("inverts_to_tail", false, e.to_string()).witness([*zero]),
    }
}

/// `f` with the value at one point negated.
struct Flipped<'a> {
    inner: &'a dyn BrouwerOracle,
    at: GridPoint,
}

impl BrouwerOracle for Flipped<'_> {
    fn spec(&self) -> GridSpec {
        self.inner.spec()
    }
    fn eval(&self, r: &GridPoint) -> Option<Direction> {
        let v = self.inner.eval(r);
        if *r == self.at {
            v.map(|s| s.opposite())
        } else {
            v
        }
    }
}

fn zp_suite(built: &Built, flip: Option<GridPoint>) -> Result<(Vec<Check>, Vec<GridPoint>), Fail> {
    let expected = built.expected_zero()?;
    let f = built.brouwer();
    let rep = match flip {
        Some(at) => audit_brouwer(&Flipped { inner: f, at })?,
        None => audit_brouwer(&f)?,
    };
    let mut checks = vec![
        Check::new(
            "bounded",
            rep.out_of_bounds.is_empty(),
            format!("{} points step outside", rep.out_of_bounds.len()),
        )
        .witness(rep.out_of_bounds.iter().take(8).copied()),
        Check::new(
            "direction_preserving",
            rep.dp_violations == 0,
            format!("{} violating pairs", rep.dp_violations),
        )
        .witness(
            rep.first_violation
                .map(|(a, b)| [a, b])
                .into_iter()
                .flatten(),
        ),
        Check::new(
            "single_zero",
            rep.zeros == [expected],
            format!("zeros found: {}, expected at {expected}", rep.zeros.len()),
        )
        .witness(rep.zeros.iter().take(8).copied()),
    ];
    if let Some(tail) = built.tail() {
        checks.push(inversion_check(&expected, &tail));
    }
    Ok((checks, rep.zeros))
}

#[derive(Debug, Serialize)]
pub struct StringReport {
    pub which: &'static str,
    pub d: usize,
    pub alphabet: i64,
    pub length: usize,
    pub pass: bool,
    pub checks: Vec<Check>,
}

fn s_block(d: usize) -> Vec<i64> {
    let mut v = vec![2; d];
    v[d - 1] = 1;
    v
}

/// A window of the form `(2p_1, ..., 2p_{d-1}, 2p_d - 1)`.
fn is_leaf_window(w: &[i64], alphabet: i64) -> bool {
    let last = w.len() - 1;
    w.iter()
        .enumerate()
        .all(|(i, &x)| (1..=alphabet).contains(&x) && (x % 2 == 1) == (i == last))
}

/// Checks a string in the text format: non-repetition, an `s_d` block at
/// one end and a leaf window at the other, and the indexed oracle against a
/// direct scan on every window. With `toc`, also compares with `S[T]` or
/// `Q[T]`.
pub fn check_string_text(text: &str, toc: Option<&Toc>, caps: &Caps) -> Result<StringReport, Fail> {
    let (s, d) = SymbolString::parse_text(text)?;
    if d == 0 || s.len() < d {
        return Err(Fail::usage(format!(
            "string of length {} has no window of length {d}",
            s.len()
        )));
    }
    let spec = GridSpec::new(d, s.alphabet_n)?;
    guard(spec, caps)?;
    let a = &s.symbols;
    let sd = s_block(d);
    let (head, tail) = (&a[..d], &a[a.len() - d..]);
    let (which, name) = if head == sd.as_slice() {
        (Which::S, "S")
    } else {
        (Which::Q, "Q")
    };
    let mut checks = vec![Check::new(
        "non_repeating",
        is_d_non_repeating(&s, d),
        format!("length {}", s.len()),
    )];
    let ends_ok = match which {
        Which::S => is_leaf_window(tail, s.alphabet_n),
        Which::Q => tail == sd.as_slice() && is_leaf_window(head, s.alphabet_n),
    };
    checks.push(Check::new(
        "endpoints",
        ends_ok,
        format!("starts {head:?}, ends {tail:?}"),
    ));
    if checks[0].pass {
        let indexed = IndexedString::new(s.clone(), d)?;
        let mut first_bad = None;
        let mut windows = 0u64;
        for w in LexPoints::cube(d, 1, s.alphabet_n) {
            windows += 1;
            if first_bad.is_none()
                && Some(indexed.query(w.coords())) != string_oracle(&s, d, w.coords()).ok()
            {
                first_bad = Some(w);
            }
        }
        checks.push(
            Check::new(
                "oracle_consistency",
                first_bad.is_none(),
                format!("{windows} windows"),
            )
            .witness(first_bad),
        );
    }
    if let Some(t) = toc {
        let built = match which {
            Which::S => build_s(t)?,
            Which::Q => build_q(t)?,
        };
        let same = built == s;
        let detail = if same {
            format!("equals {name}[T]")
        } else {
            let k = a
                .iter()
                .zip(&built.symbols)
                .take_while(|(x, y)| x == y)
                .count();
            format!("differs from {name}[T] at position {k}")
        };
        checks.push(Check::new("matches_instance", same, detail));
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(StringReport {
        which: name,
        d,
        alphabet: s.alphabet_n,
        length: s.len(),
        pass,
        checks,
    })
}
