//! Per-layer query counters and the transparent counting wrapper.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Oracle layers of the reduction stack, bottom to top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    /// `B_T` on a Tree-of-Connectors.
    Toc,
    /// `B_S` on a non-repeating string.
    String,
    /// The generalized grid graph built from a string.
    GStar,
    /// The grid PPAD graph `G'`.
    GPrime,
    /// The canonical grid PPAD graph.
    Canonical,
    /// Evaluations of the Brouwer function.
    Brouwer,
}

impl Layer {
    pub const ALL: [Layer; 6] =
        [Layer::Toc, Layer::String, Layer::GStar, Layer::GPrime, Layer::Canonical, Layer::Brouwer];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::Toc => "toc",
            Layer::String => "string",
            Layer::GStar => "gstar",
            Layer::GPrime => "gprime",
            Layer::Canonical => "canonical",
            Layer::Brouwer => "brouwer",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Monotone per-layer counters. Shared by `Arc` between the wrappers of one
/// stack; never decremented.
#[derive(Debug, Default)]
pub struct QueryCounter {
    counts: [AtomicU64; 6],
}

impl QueryCounter {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn bump(&self, layer: Layer) {
        self.counts[layer.index()].fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self, layer: Layer) -> u64 {
        self.counts[layer.index()].load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> Counts {
        let mut c = Counts::default();
        for l in Layer::ALL {
            c.0[l.index()] = self.get(l);
        }
        c
    }
}

/// A frozen copy of the counters, convenient for differences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts(pub [u64; 6]);

impl Counts {
    pub fn get(&self, layer: Layer) -> u64 {
        self.0[layer.index()]
    }

    /// Componentwise `self - earlier`.
    pub fn since(&self, earlier: &Counts) -> Counts {
        let mut c = *self;
        for (x, e) in c.0.iter_mut().zip(earlier.0) {
            *x -= e;
        }
        c
    }

    pub fn as_map(&self) -> std::collections::BTreeMap<&'static str, u64> {
        Layer::ALL.iter().map(|&l| (l.name(), self.get(l))).collect()
    }
}

/// Wraps an oracle and bumps `layer` once per query. Answers pass through
/// unchanged; the trait impls live next to each oracle trait.
#[derive(Debug, Clone)]
pub struct Counted<O> {
    pub inner: O,
    pub counter: Arc<QueryCounter>,
    pub layer: Layer,
}

impl<O> Counted<O> {
    pub fn new(inner: O, counter: Arc<QueryCounter>, layer: Layer) -> Self {
        Counted { inner, counter, layer }
    }

    pub(crate) fn tick(&self) {
        self.counter.bump(self.layer);
    }
}
