//! Compact convex feasible regions with exact Euclidean projection.

use crate::error::{LlpError, Result};
use crate::linalg::{dist, norm};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind<T> {
    /// `[lower, upper]^dim`
    Cube { lower: T, upper: T, dim: usize },
    /// `∏ [lower_k, upper_k]`
    Intervals(Vec<(T, T)>),
    /// `{x : ‖x − center‖ ≤ radius}`
    Ball { center: Vec<T>, radius: T },
    /// `{x ⪰ 0 : Σ x = scale}`
    Simplex { scale: T, dim: usize },
}

/// A feasible region together with the bound `D ≥ ‖x‖` on its points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet<T> {
    kind: SetKind<T>,
    diameter_bound: T,
}

impl<T: Scalar> ConvexSet<T> {
    /// Validates the geometry and checks `‖project(0)‖ ≤ D`.
    pub fn new(kind: SetKind<T>, diameter_bound: T) -> Result<Self> {
        match &kind {
            SetKind::Cube { lower, upper, dim } => {
                if *dim == 0 || !(lower <= upper) || !lower.is_finite() || !upper.is_finite() {
                    return Err(LlpError::config("cube needs dim ≥ 1 and finite lower ≤ upper"));
                }
            }
            SetKind::Intervals(iv) => {
                if iv.is_empty() || iv.iter().any(|&(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
                    return Err(LlpError::config(
                        "interval product needs finite lower ≤ upper per coordinate",
                    ));
                }
            }
            SetKind::Ball { center, radius } => {
                if center.is_empty() || !(*radius > T::zero()) || !radius.is_finite() {
                    return Err(LlpError::config("ball needs dim ≥ 1 and a positive finite radius"));
                }
            }
            SetKind::Simplex { scale, dim } => {
                if *dim == 0 || !(*scale > T::zero()) || !scale.is_finite() {
                    return Err(LlpError::config("simplex needs dim ≥ 1 and a positive finite scale"));
                }
            }
        }
        if !(diameter_bound > T::zero()) || !diameter_bound.is_finite() {
            return Err(LlpError::config("diameter bound D must be positive and finite"));
        }
        let set = ConvexSet { kind, diameter_bound };
        let origin = vec![T::zero(); set.dim()];
        let anchor = set.project(&origin)?;
        if norm(&anchor) > diameter_bound * (T::one() + lit(1e-12)) {
            return Err(LlpError::config(format!(
                "diameter bound {diameter_bound} smaller than ‖project(0)‖ = {}",
                norm(&anchor)
            )));
        }
        Ok(set)
    }

    /// `[lower, upper]^dim` with `D = √dim · max(|lower|, |upper|)`.
    pub fn cube(lower: T, upper: T, dim: usize) -> Result<Self> {
        let d = (lit::<T>(dim as f64)).sqrt() * lower.abs().max(upper.abs());
        Self::new(SetKind::Cube { lower, upper, dim }, d.max(lit(1e-300)))
    }

    pub fn intervals(bounds: Vec<(T, T)>) -> Result<Self> {
        let d = bounds
            .iter()
            .map(|&(l, u)| {
                let m = l.abs().max(u.abs());
                m * m
            })
            .sum::<T>()
            .sqrt();
        Self::new(SetKind::Intervals(bounds), d.max(lit(1e-300)))
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        let d = norm(&center) + radius;
        Self::new(SetKind::Ball { center, radius }, d)
    }

    pub fn simplex(scale: T, dim: usize) -> Result<Self> {
        Self::new(SetKind::Simplex { scale, dim }, scale)
    }

    pub fn kind(&self) -> &SetKind<T> {
        &self.kind
    }

    pub fn diameter_bound(&self) -> T {
        self.diameter_bound
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::Cube { dim, .. } | SetKind::Simplex { dim, .. } => *dim,
            SetKind::Intervals(iv) => iv.len(),
            SetKind::Ball { center, .. } => center.len(),
        }
    }

    /// Euclidean projection of `y` onto the set.
    pub fn project(&self, y: &[T]) -> Result<Vec<T>> {
        LlpError::check_dim("projection input", self.dim(), y.len())?;
        Ok(self.project_unchecked(y))
    }

    pub(crate) fn project_unchecked(&self, y: &[T]) -> Vec<T> {
        match &self.kind {
            SetKind::Cube { lower, upper, .. } => y.iter().map(|&v| v.max(*lower).min(*upper)).collect(),
            SetKind::Intervals(iv) => y.iter().zip(iv).map(|(&v, &(l, u))| v.max(l).min(u)).collect(),
            SetKind::Ball { center, radius } => project_ball(y, center, *radius),
            SetKind::Simplex { scale, .. } => project_simplex(y, *scale),
        }
    }

    /// Membership test with absolute tolerance `tol`.
    pub fn contains(&self, x: &[T], tol: T) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match &self.kind {
            SetKind::Cube { lower, upper, .. } => x.iter().all(|&v| v >= *lower - tol && v <= *upper + tol),
            SetKind::Intervals(iv) => x.iter().zip(iv).all(|(&v, &(l, u))| v >= l - tol && v <= u + tol),
            SetKind::Ball { center, radius } => dist(x, center) <= *radius + tol,
            SetKind::Simplex { scale, .. } => {
                x.iter().all(|&v| v >= -tol) && (x.iter().copied().sum::<T>() - *scale).abs() <= tol
            }
        }
    }

    /// Coordinate-wise bounding box, used by grid searches.
    pub fn bounding_box(&self) -> Vec<(T, T)> {
        match &self.kind {
            SetKind::Cube { lower, upper, dim } => vec![(*lower, *upper); *dim],
            SetKind::Intervals(iv) => iv.clone(),
            SetKind::Ball { center, radius } => center.iter().map(|&c| (c - *radius, c + *radius)).collect(),
            SetKind::Simplex { scale, dim } => vec![(T::zero(), *scale); *dim],
        }
    }

    /// A minimizer of `vᵀx` over the set. When the minimizing face is not a
    /// single point, returns the point of that face closest to `tie_break`.
    pub fn linear_minimizer(&self, v: &[T], tie_break: &[T]) -> Vec<T> {
        match &self.kind {
            SetKind::Cube { lower, upper, .. } => v
                .iter()
                .zip(tie_break)
                .map(|(&vi, &p)| face_coordinate(vi, p, *lower, *upper))
                .collect(),
            SetKind::Intervals(iv) => v
                .iter()
                .zip(tie_break)
                .zip(iv)
                .map(|((&vi, &p), &(l, u))| face_coordinate(vi, p, l, u))
                .collect(),
            SetKind::Ball { center, radius } => {
                let n = norm(v);
                if n > T::zero() {
                    center.iter().zip(v).map(|(&c, &vi)| c - *radius * vi / n).collect()
                } else {
                    project_ball(tie_break, center, *radius)
                }
            }
            SetKind::Simplex { scale, .. } => {
                let min = v.iter().copied().fold(T::infinity(), T::min);
                let face: Vec<usize> = (0..v.len()).filter(|&i| v[i] == min).collect();
                let restricted: Vec<T> = face.iter().map(|&i| tie_break[i]).collect();
                let on_face = project_simplex(&restricted, *scale);
                let mut out = vec![T::zero(); v.len()];
                for (k, &i) in face.iter().enumerate() {
                    out[i] = on_face[k];
                }
                out
            }
        }
    }
}

fn face_coordinate<T: Scalar>(v: T, p: T, lower: T, upper: T) -> T {
    if v > T::zero() {
        lower
    } else if v < T::zero() {
        upper
    } else {
        p.max(lower).min(upper)
    }
}

fn project_ball<T: Scalar>(y: &[T], center: &[T], radius: T) -> Vec<T> {
    let d = dist(y, center);
    if d <= radius {
        return y.to_vec();
    }
    let mut s = radius / d;
    // rounding can leave the scaled point a hair outside; shrink until inside so
    // that a second projection is the identity
    loop {
        let x: Vec<T> = y.iter().zip(center).map(|(&yi, &c)| c + (yi - c) * s).collect();
        if dist(&x, center) <= radius {
            return x;
        }
        s = s * (T::one() - T::epsilon());
    }
}

fn project_simplex<T: Scalar>(y: &[T], scale: T) -> Vec<T> {
    let n = y.len();
    let sum: T = y.iter().copied().sum();
    let tol = lit::<T>(4.0 * n as f64) * T::epsilon() * scale.max(T::one());
    if y.iter().all(|&v| v >= T::zero()) && (sum - scale).abs() <= tol {
        return y.to_vec();
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumulative = T::zero();
    let mut tau = T::zero();
    for (j, &u) in sorted.iter().enumerate() {
        cumulative = cumulative + u;
        let candidate = (cumulative - scale) / lit(j as f64 + 1.0);
        if u - candidate > T::zero() {
            tau = candidate;
        }
    }
    y.iter().map(|&v| (v - tau).max(T::zero())).collect()
}
