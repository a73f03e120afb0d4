//! Cost and constraint oracles.

use std::fmt::Debug;
use std::sync::Arc;

use crate::linalg::{axpy, dot, norm, Jacobian};
use crate::scalar::{lit, Scalar};

/// `f(x) = (curvature/2)‖x‖² + linearᵀx + constant`
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm<T> {
    pub curvature: T,
    pub linear: Vec<T>,
    pub constant: T,
}

impl<T: Scalar> QuadraticForm<T> {
    pub fn zero(dim: usize) -> Self {
        QuadraticForm {
            curvature: T::zero(),
            linear: vec![T::zero(); dim],
            constant: T::zero(),
        }
    }

    pub fn value(&self, x: &[T]) -> T {
        self.curvature * dot(x, x) / lit(2.0) + dot(&self.linear, x) + self.constant
    }

    pub fn accumulate(&mut self, other: &QuadraticForm<T>) {
        self.curvature = self.curvature + other.curvature;
        axpy(&mut self.linear, T::one(), &other.linear);
        self.constant = self.constant + other.constant;
    }
}

/// A convex per-round cost `f_t`.
pub trait CostFn<T: Scalar>: Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// Value and a (sub)gradient at `x`.
    fn eval(&self, x: &[T]) -> (T, Vec<T>);

    fn value(&self, x: &[T]) -> T {
        self.eval(x).0
    }

    /// Exact quadratic representation, if the cost has one.
    fn quadratic_form(&self) -> Option<QuadraticForm<T>> {
        None
    }

    /// Lipschitz constant of the gradient; `None` for nonsmooth costs.
    fn smoothness(&self) -> Option<T> {
        self.quadratic_form().map(|q| q.curvature)
    }
}

/// A vector of `d` convex constraint functions `g_t`.
pub trait ConstraintFn<T: Scalar>: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn rows(&self) -> usize;

    /// Values and Jacobian at `x`.
    fn eval(&self, x: &[T]) -> (Vec<T>, Jacobian<T>);

    fn values(&self, x: &[T]) -> Vec<T> {
        self.eval(x).0
    }

    /// `(J, b)` with `g(x) = J x + b`, when the constraint is affine.
    fn affine(&self) -> Option<(Jacobian<T>, Vec<T>)> {
        None
    }

    /// Lipschitz constant shared by every row's gradient; `None` for nonsmooth rows.
    fn smoothness(&self) -> Option<T> {
        self.affine().map(|_| T::zero())
    }
}

pub type SharedCost<T> = Arc<dyn CostFn<T>>;
pub type SharedConstraint<T> = Arc<dyn ConstraintFn<T>>;

/// `f(x) = linearᵀx + constant`
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCost<T> {
    pub linear: Vec<T>,
    pub constant: T,
}

impl<T: Scalar> AffineCost<T> {
    pub fn new(linear: Vec<T>, constant: T) -> Self {
        AffineCost { linear, constant }
    }
}

impl<T: Scalar> CostFn<T> for AffineCost<T> {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn eval(&self, x: &[T]) -> (T, Vec<T>) {
        (dot(&self.linear, x) + self.constant, self.linear.clone())
    }

    fn quadratic_form(&self) -> Option<QuadraticForm<T>> {
        Some(QuadraticForm {
            curvature: T::zero(),
            linear: self.linear.clone(),
            constant: self.constant,
        })
    }
}

/// `f(x) = (weight/2)‖x − center‖²`
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCost<T> {
    pub center: Vec<T>,
    pub weight: T,
}

impl<T: Scalar> QuadraticCost<T> {
    pub fn new(center: Vec<T>, weight: T) -> Self {
        QuadraticCost { center, weight }
    }
}

impl<T: Scalar> CostFn<T> for QuadraticCost<T> {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn eval(&self, x: &[T]) -> (T, Vec<T>) {
        let diff: Vec<T> = x.iter().zip(&self.center).map(|(&a, &b)| a - b).collect();
        let value = self.weight * dot(&diff, &diff) / lit(2.0);
        (value, diff.into_iter().map(|v| v * self.weight).collect())
    }

    fn quadratic_form(&self) -> Option<QuadraticForm<T>> {
        Some(QuadraticForm {
            curvature: self.weight,
            linear: self.center.iter().map(|&c| -self.weight * c).collect(),
            constant: self.weight * dot(&self.center, &self.center) / lit(2.0),
        })
    }
}

/// `g(x) = J x + b`
#[derive(Debug, Clone, PartialEq)]
pub struct AffineConstraint<T> {
    pub jacobian: Jacobian<T>,
    pub offset: Vec<T>,
}

impl<T: Scalar> AffineConstraint<T> {
    pub fn new(jacobian: Jacobian<T>, offset: Vec<T>) -> Self {
        debug_assert_eq!(jacobian.rows(), offset.len());
        AffineConstraint { jacobian, offset }
    }

    /// Scalar constraint `slope·x + intercept` on `R^1`.
    pub fn scalar(slope: T, intercept: T) -> Self {
        AffineConstraint {
            jacobian: Jacobian::from_row_major(1, 1, vec![slope]).expect("1x1"),
            offset: vec![intercept],
        }
    }

    pub fn negated(&self) -> Self {
        AffineConstraint {
            jacobian: self.jacobian.scaled(-T::one()),
            offset: self.offset.iter().map(|&v| -v).collect(),
        }
    }
}

impl<T: Scalar> ConstraintFn<T> for AffineConstraint<T> {
    fn dim(&self) -> usize {
        self.jacobian.cols()
    }

    fn rows(&self) -> usize {
        self.jacobian.rows()
    }

    fn eval(&self, x: &[T]) -> (Vec<T>, Jacobian<T>) {
        (self.values(x), self.jacobian.clone())
    }

    fn values(&self, x: &[T]) -> Vec<T> {
        let mut v = self.jacobian.apply(x);
        axpy(&mut v, T::one(), &self.offset);
        v
    }

    fn affine(&self) -> Option<(Jacobian<T>, Vec<T>)> {
        Some((self.jacobian.clone(), self.offset.clone()))
    }
}

/// `g(x) = base(x) + shift`, a linearly perturbed constraint.
#[derive(Debug, Clone)]
pub struct ShiftedConstraint<T: Scalar> {
    pub base: SharedConstraint<T>,
    pub shift: Vec<T>,
}

impl<T: Scalar> ShiftedConstraint<T> {
    pub fn new(base: SharedConstraint<T>, shift: Vec<T>) -> Self {
        debug_assert_eq!(base.rows(), shift.len());
        ShiftedConstraint { base, shift }
    }
}

impl<T: Scalar> ConstraintFn<T> for ShiftedConstraint<T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn rows(&self) -> usize {
        self.base.rows()
    }

    fn eval(&self, x: &[T]) -> (Vec<T>, Jacobian<T>) {
        let (mut v, j) = self.base.eval(x);
        axpy(&mut v, T::one(), &self.shift);
        (v, j)
    }

    fn affine(&self) -> Option<(Jacobian<T>, Vec<T>)> {
        self.base.affine().map(|(j, mut b)| {
            axpy(&mut b, T::one(), &self.shift);
            (j, b)
        })
    }

    fn smoothness(&self) -> Option<T> {
        self.base.smoothness()
    }
}

type ConstraintClosure<T> = dyn Fn(&[T]) -> (Vec<T>, Jacobian<T>) + Send + Sync;
type CostClosure<T> = dyn Fn(&[T]) -> (T, Vec<T>) + Send + Sync;

/// Constraint given by a closure returning values and Jacobian.
#[derive(Clone)]
pub struct ClosureConstraint<T> {
    dim: usize,
    rows: usize,
    smoothness: Option<T>,
    f: Arc<ConstraintClosure<T>>,
}

impl<T: Scalar> ClosureConstraint<T> {
    /// `smoothness = None` marks the rows as nonsmooth.
    pub fn new(
        dim: usize,
        rows: usize,
        smoothness: Option<T>,
        f: impl Fn(&[T]) -> (Vec<T>, Jacobian<T>) + Send + Sync + 'static,
    ) -> Self {
        ClosureConstraint {
            dim,
            rows,
            smoothness,
            f: Arc::new(f),
        }
    }
}

impl<T> Debug for ClosureConstraint<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosureConstraint")
            .field("dim", &self.dim)
            .field("rows", &self.rows)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> ConstraintFn<T> for ClosureConstraint<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rows(&self) -> usize {
        self.rows
    }

    fn eval(&self, x: &[T]) -> (Vec<T>, Jacobian<T>) {
        (self.f)(x)
    }

    fn smoothness(&self) -> Option<T> {
        self.smoothness
    }
}

/// Cost given by a closure returning value and gradient.
#[derive(Clone)]
pub struct ClosureCost<T> {
    dim: usize,
    smoothness: Option<T>,
    f: Arc<CostClosure<T>>,
}

impl<T: Scalar> ClosureCost<T> {
    pub fn new(dim: usize, smoothness: Option<T>, f: impl Fn(&[T]) -> (T, Vec<T>) + Send + Sync + 'static) -> Self {
        ClosureCost {
            dim,
            smoothness,
            f: Arc::new(f),
        }
    }
}

impl<T> Debug for ClosureCost<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosureCost")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> CostFn<T> for ClosureCost<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[T]) -> (T, Vec<T>) {
        (self.f)(x)
    }

    fn smoothness(&self) -> Option<T> {
        self.smoothness
    }
}

/// The zero constraint with `rows` rows.
pub fn zero_constraint<T: Scalar>(dim: usize, rows: usize) -> AffineConstraint<T> {
    AffineConstraint::new(Jacobian::zeros(rows, dim), vec![T::zero(); rows])
}

/// `‖g(x)‖`, used by bound checks.
pub fn constraint_norm<T: Scalar>(g: &dyn ConstraintFn<T>, x: &[T]) -> T {
    norm(&g.values(x))
}
