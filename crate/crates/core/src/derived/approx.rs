//! Bookkeeping for truncated computations: where a chain-level model may
//! differ from the true derived object, and where its homology is trusted.

use serde::{Deserialize, Serialize};

use crate::complex::Window;
use crate::dg::DgModule;

/// Support and error bounds of a chain-level model. The model may be wrong
/// in chain degrees `<= low` and `>= high`; `None` means no error on that
/// side. An empty support is the zero object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Approx {
    pub bottom: Option<i64>,
    pub top: Option<i64>,
    pub low: Option<i64>,
    pub high: Option<i64>,
}

fn opt_min(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    }
}

fn opt_max(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) | (None, x) => x,
    }
}

impl Approx {
    pub fn exact(m: &DgModule) -> Approx {
        Approx {
            bottom: m.space().bottom(),
            top: m.space().top(),
            low: None,
            high: None,
        }
    }

    /// A model agreeing with the true object below chain degree `missing`.
    pub fn truncated(m: &DgModule, missing: Option<i64>) -> Approx {
        Approx {
            high: missing,
            ..Approx::exact(m)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bottom.is_none()
    }

    pub fn is_exact(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }

    /// Replaces the support by that of the computed model.
    pub fn with_support(self, m: &DgModule) -> Approx {
        Approx {
            bottom: m.space().bottom(),
            top: m.space().top(),
            ..self
        }
    }

    pub fn tensor(x: &Approx, y: &Approx) -> Approx {
        if x.is_zero() || y.is_zero() {
            return Approx {
                bottom: None,
                top: None,
                low: None,
                high: None,
            };
        }
        let (bx, tx, by, ty) = (x.bottom.unwrap(), x.top.unwrap(), y.bottom.unwrap(), y.top.unwrap());
        let high = opt_min(x.high.map(|h| h + by), y.high.map(|h| h + bx));
        let low = opt_max(x.low.map(|l| l + ty), y.low.map(|l| l + tx));
        Approx {
            bottom: Some(bx + by),
            top: Some(tx + ty),
            low,
            high,
        }
    }

    pub fn hom(x: &Approx, y: &Approx) -> Approx {
        if x.is_zero() || y.is_zero() {
            return Approx {
                bottom: None,
                top: None,
                low: None,
                high: None,
            };
        }
        let (bx, tx, by, ty) = (x.bottom.unwrap(), x.top.unwrap(), y.bottom.unwrap(), y.top.unwrap());
        let low = opt_max(x.high.map(|h| ty - h), y.low.map(|l| l - bx));
        let high = opt_min(x.low.map(|l| by - l), y.high.map(|h| h - tx));
        Approx {
            bottom: Some(by - tx),
            top: Some(ty - bx),
            low,
            high,
        }
    }

    pub fn combine(x: &Approx, y: &Approx) -> Approx {
        Approx {
            bottom: opt_min(x.bottom, y.bottom),
            top: opt_max(x.top, y.top),
            low: opt_max(x.low, y.low),
            high: opt_min(x.high, y.high),
        }
    }

    /// Degrees where homology of the model is that of the true object.
    pub fn trusted(&self) -> Trusted {
        Trusted {
            lo: self.low.map(|l| l + 2),
            hi: self.high.map(|h| h - 2),
        }
    }
}

/// A possibly unbounded range of degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trusted {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Trusted {
    pub fn all() -> Trusted {
        Trusted { lo: None, hi: None }
    }

    pub fn covers(&self, w: &Window) -> bool {
        self.lo.is_none_or(|l| l <= w.lo) && self.hi.is_none_or(|h| w.hi <= h)
    }

    pub fn meet(&self, other: &Trusted) -> Trusted {
        Trusted {
            lo: opt_max(self.lo, other.lo),
            hi: opt_min(self.hi, other.hi),
        }
    }

    pub fn restrict(&self, w: &Window) -> Option<Window> {
        let lo = self.lo.map_or(w.lo, |l| l.max(w.lo));
        let hi = self.hi.map_or(w.hi, |h| h.min(w.hi));
        Window::new(lo, hi).ok()
    }

    /// How far the trusted range falls short of `w` on either side.
    pub fn shortfall(&self, w: &Window) -> i64 {
        let below = self.lo.map_or(0, |l| (l - w.lo).max(0));
        let above = self.hi.map_or(0, |h| (w.hi - h).max(0));
        below.max(above)
    }
}

/// `[min(lo, -hi), max(hi, -lo)]`, so that both homological and
/// cohomological readings of `w` are covered.
pub fn symmetrize(w: Window) -> Window {
    Window {
        lo: w.lo.min(-w.hi),
        hi: w.hi.max(-w.lo),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(b: i64, t: i64, low: Option<i64>, high: Option<i64>) -> Approx {
        Approx {
            bottom: Some(b),
            top: Some(t),
            low,
            high,
        }
    }

    #[test]
    fn tensor_with_truncated_resolution() {
        // resolution missing generators from degree 10, tensored with k in degree 0
        let p = a(0, 11, None, Some(10));
        let k = a(0, 0, None, None);
        let t = Approx::tensor(&k, &p);
        assert_eq!(t.trusted(), Trusted { lo: None, hi: Some(8) });
    }

    #[test]
    fn hom_from_truncated_resolution() {
        let p = a(0, 11, None, Some(10));
        let k = a(0, 0, None, None);
        let h = Approx::hom(&p, &k);
        assert_eq!(h.bottom, Some(-11));
        assert_eq!(h.trusted(), Trusted { lo: Some(-8), hi: None });
    }

    #[test]
    fn windows() {
        let w = Window { lo: 0, hi: 8 };
        assert_eq!(symmetrize(w), Window { lo: -8, hi: 8 });
        let t = Trusted { lo: Some(-3), hi: None };
        assert!(t.covers(&w));
        assert_eq!(t.restrict(&symmetrize(w)), Some(Window { lo: -3, hi: 8 }));
        assert_eq!(t.shortfall(&symmetrize(w)), 5);
    }
}
