//! The composed stack from a Tree-of-Connectors up to a Brouwer function,
//! with a counter wrapping every layer, and the inverse map from the zero
//! back to the tail leaf.

use std::sync::Arc;

use crate::brouwer::{BrouwerFn, BrouwerOracle};
use crate::counter::{Counted, Layer, QueryCounter};
use crate::error::{Error, Result};
use crate::graph::{f_embed_inv, Canonical, GPrime, GStar, GenGraphOracle, GenMemo, GraphOracle, Memo};
use crate::lattice::GridPoint;
use crate::toc::{Name, Toc, TocStrings, Which};

pub type TocLayer = Counted<Toc>;
pub type StringLayer = Counted<TocStrings<TocLayer>>;
pub type GStarLayer = Counted<GenMemo<GStar<StringLayer>>>;
pub type GPrimeLayer = Counted<GPrime<GStarLayer>>;
pub type CanonicalLayer = Counted<Memo<Canonical<GPrimeLayer>>>;
pub type BrouwerLayer = Counted<BrouwerFn<CanonicalLayer>>;

/// Every counter counts the queries issued to its layer. With caching on,
/// layers below a cache only see misses, so cross-layer ratios are only
/// meaningful with caching off.
pub struct Stack {
    top: BrouwerLayer,
    counter: Arc<QueryCounter>,
}

impl Stack {
    pub fn new(toc: Toc, cache: bool) -> Result<Self> {
        let counter = QueryCounter::new();
        let k = || counter.clone();
        let toc = Counted::new(toc, k(), Layer::Toc);
        let strings = Counted::new(TocStrings::new(toc, Which::S)?, k(), Layer::String);
        let gstar = GStar::new(strings);
        let gstar = Counted::new(if cache { GenMemo::new(gstar) } else { GenMemo::off(gstar) }, k(), Layer::GStar);
        let gprime = Counted::new(GPrime::new(gstar), k(), Layer::GPrime);
        let canonical = Canonical::new(gprime)?;
        let canonical =
            Counted::new(if cache { Memo::new(canonical) } else { Memo::off(canonical) }, k(), Layer::Canonical);
        let top = Counted::new(BrouwerFn::new(canonical)?, k(), Layer::Brouwer);
        Ok(Stack { top, counter })
    }

    pub fn counter(&self) -> &Arc<QueryCounter> {
        &self.counter
    }

    pub fn brouwer(&self) -> &BrouwerLayer {
        &self.top
    }

    pub fn canonical(&self) -> &CanonicalLayer {
        self.top.inner.graph()
    }

    pub fn gprime(&self) -> &GPrimeLayer {
        self.canonical().inner.inner().inner()
    }

    pub fn gstar(&self) -> &GStarLayer {
        self.gprime().inner.inner()
    }

    pub fn strings(&self) -> &StringLayer {
        self.gstar().inner.inner().string()
    }

    pub fn toc(&self) -> &Toc {
        &self.strings().inner.oracle().inner
    }

    /// Side lengths from the string alphabet up to the Brouwer grid.
    pub fn sides(&self) -> [i64; 5] {
        [
            self.strings().inner.oracle().inner.spec().alphabet(),
            self.gstar().spec().n,
            self.gprime().spec().n,
            self.canonical().spec().n,
            self.top.spec().n,
        ]
    }
}

/// The unique `u` with `|w - (k u - c)|_inf <= r`; needs `2r < k`.
fn snap(w: &GridPoint, k: i64, c: i64, r: i64) -> Result<GridPoint> {
    let mut u = *w;
    for (ui, &wi) in u.coords_mut().iter_mut().zip(w.coords()) {
        let x = (wi + c + r).div_euclid(k);
        if (wi - (k * x - c)).abs() > r {
            return Err(Error::Inversion(format!("{w} is not within {r} of any {k}u-{c}")));
        }
        *ui = x;
    }
    Ok(u)
}

/// Maps the zero of a composed Brouwer function back to the leaf of the
/// source ToC that ends its string.
pub fn invert_chain(zero: &GridPoint) -> Result<Name> {
    if zero.coords().iter().any(|c| c % 4 != 0) {
        return Err(Error::Inversion(format!("{zero} is not in the image of 4u")));
    }
    let mut cgp = *zero;
    cgp.coords_mut().iter_mut().for_each(|c| *c /= 4);
    let gp = snap(&cgp, 6, 2, 2)?;
    let gs = snap(&gp, 4, 1, 1)?;
    let block = f_embed_inv(&gs).ok_or_else(|| Error::Inversion(format!("{gs} is not a block image")))?;
    let last = block.len() - 1;
    let mut leaf = Vec::with_capacity(block.len());
    for (i, &x) in block.iter().enumerate() {
        let odd = i == last;
        if (x.rem_euclid(2) == 1) != odd {
            return Err(Error::Inversion(format!("window {block:?} has the wrong parity")));
        }
        leaf.push(if odd { (x + 1) / 2 } else { x / 2 });
    }
    Ok(leaf)
}
