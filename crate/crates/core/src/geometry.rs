//! Contiguous arcs of the unit circle.
//!
//! An [`ArcInterval`] is stored as `(start, width)` with `start` normalized to
//! `[-π, π)` and `width` in `[0, 2π]`, so the full circle and arcs that wrap
//! across `±π` need no special casing by callers. Arcs are closed at the start
//! and open at the end: adjacent sectors partition the circle.
//!
//! Set operations are evaluated in the frame of the left operand (angles
//! measured as offsets from its start), which keeps widths exact whenever the
//! operands share a boundary. Bisection relies on this: halving a support and
//! intersecting or subtracting the half never rounds the resulting width.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Absolute tolerance for angle comparisons.
pub const ANGLE_TOL: f64 = 1e-12;

/// Arcs narrower than this are empty.
pub const EMPTY_WIDTH: f64 = 1e-15;

/// Boundary snapping never exceeds this fraction of the narrower operand, so
/// arcs far below [`ANGLE_TOL`] wide (deep bisection) stay resolvable.
const REL_TOL: f64 = 1e-6;

fn snap_tol(scale: f64) -> f64 {
    ANGLE_TOL.min(scale * REL_TOL)
}

/// Maps `theta` onto `[-π, π)`. Values already in range are returned unchanged.
pub fn normalize_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::NonFinite(theta));
    }
    Ok(normalize_finite(theta))
}

fn normalize_finite(theta: f64) -> f64 {
    if (-PI..PI).contains(&theta) {
        return theta;
    }
    let r = wrap_offset(theta + PI) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

/// Maps `x` onto `[0, 2π)`.
fn wrap_offset(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcInterval {
    start: f64,
    width: f64,
}

impl ArcInterval {
    /// Builds the arc `[start, start + width)`. Widths that overshoot `2π` by
    /// less than [`ANGLE_TOL`] are clamped to the full circle.
    pub fn new(start: f64, width: f64) -> Result<Self> {
        let start = normalize_angle(start)?;
        if !(0.0..=TAU + ANGLE_TOL).contains(&width) {
            return Err(Error::InvalidArc(format!("width {width} outside [0, 2π]")));
        }
        Ok(Self {
            start,
            width: width.min(TAU),
        })
    }

    /// The arc `[lo, hi)`, with `lo <= hi <= lo + 2π`.
    pub fn spanning(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi - lo)
    }

    /// The arc of the given width centered on `center` (beam direction).
    pub fn centered(center: f64, width: f64) -> Result<Self> {
        Self::new(center - width / 2.0, width)
    }

    pub fn full_circle() -> Self {
        Self {
            start: -PI,
            width: TAU,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Unnormalized end angle `start + width`; may exceed `π` for wrapping arcs.
    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    /// Beam direction: the normalized midpoint.
    pub fn center(&self) -> f64 {
        normalize_finite(self.start + self.width / 2.0)
    }

    pub fn measure(&self) -> f64 {
        self.width
    }

    pub fn is_full(&self) -> bool {
        self.width >= TAU
    }

    pub fn is_empty(&self) -> bool {
        self.width < EMPTY_WIDTH
    }

    pub fn wraps(&self) -> bool {
        self.end() > PI
    }

    pub fn rotate(&self, delta: f64) -> Result<Self> {
        Ok(Self {
            start: normalize_angle(self.start + delta)?,
            width: self.width,
        })
    }

    /// Membership under the closed-start, open-end convention. Points within
    /// tolerance of a boundary belong to the arc that starts there.
    pub fn contains(&self, theta: f64) -> bool {
        if !theta.is_finite() || self.is_empty() {
            return false;
        }
        if self.is_full() {
            return true;
        }
        let tol = snap_tol(self.width);
        let mut off = wrap_offset(normalize_finite(theta) - self.start);
        if off > TAU - tol {
            off = 0.0;
        }
        off < self.width - tol
    }

    pub fn intersect(&self, other: &ArcInterval) -> Vec<ArcInterval> {
        let pieces = self.overlap_offsets(other);
        self.offsets_to_arcs(pieces)
    }

    /// `self ∩ otherᶜ` as disjoint arcs.
    pub fn subtract(&self, other: &ArcInterval) -> Vec<ArcInterval> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut gaps = Vec::with_capacity(2);
        let mut cursor = 0.0;
        for (lo, hi) in self.overlap_offsets(other) {
            if lo - cursor >= EMPTY_WIDTH {
                gaps.push((cursor, lo));
            }
            cursor = hi;
        }
        if self.width - cursor >= EMPTY_WIDTH {
            gaps.push((cursor, self.width));
        }
        self.offsets_to_arcs(gaps)
    }

    /// Splits a non-empty arc at its midpoint into `(lower, upper)`.
    pub fn halves(&self) -> Result<(ArcInterval, ArcInterval)> {
        if self.is_empty() {
            return Err(Error::InvalidArc("cannot halve an empty arc".into()));
        }
        let half = self.width / 2.0;
        let lower = Self {
            start: self.start,
            width: half,
        };
        let upper = Self {
            start: normalize_finite(self.start + half),
            width: half,
        };
        Ok((lower, upper))
    }

    /// Overlap of `other` with `self`, as sorted disjoint offset ranges within
    /// `[0, self.width)`.
    fn overlap_offsets(&self, other: &ArcInterval) -> Vec<(f64, f64)> {
        if self.is_empty() || other.is_empty() {
            return Vec::new();
        }
        if other.is_full() {
            return vec![(0.0, self.width)];
        }
        let wa = self.width;
        let tol = snap_tol(wa.min(other.width));
        let mut off = wrap_offset(other.start - self.start);
        if off < tol || off > TAU - tol {
            off = 0.0;
        }
        let mut out = Vec::with_capacity(2);
        for base in [off - TAU, off] {
            let mut lo = base.max(0.0);
            let mut hi = (base + other.width).min(wa);
            if lo < tol {
                lo = 0.0;
            }
            if (wa - hi).abs() < tol {
                hi = wa;
            }
            if hi - lo >= EMPTY_WIDTH {
                out.push((lo, hi));
            }
        }
        out
    }

    /// Converts offset ranges in this arc's frame back to arcs, merging ranges
    /// that touch (including across the seam of a full circle).
    fn offsets_to_arcs(&self, mut pieces: Vec<(f64, f64)>) -> Vec<ArcInterval> {
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match merged.last_mut() {
                Some(last) if lo - last.1 < snap_tol(hi - lo) => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        if self.is_full() && merged.len() >= 2 {
            let first = merged[0];
            let last = merged[merged.len() - 1];
            if first.0 == 0.0 && last.1 == self.width {
                merged.pop();
                merged[0] = (last.0, first.1 + TAU);
            }
        }
        merged
            .into_iter()
            .map(|(lo, hi)| ArcInterval {
                start: if lo == 0.0 {
                    self.start
                } else {
                    normalize_finite(self.start + lo)
                },
                width: (hi - lo).min(TAU),
            })
            .collect()
    }
}

pub fn total_measure(arcs: &[ArcInterval]) -> f64 {
    arcs.iter().map(ArcInterval::measure).sum()
}
