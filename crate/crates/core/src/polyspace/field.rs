//! Scalar fields with analytic derivatives.

use crate::mesh::Point;

/// A smooth scalar field on the plane with derivatives of any order.
pub trait ScalarField: Sync {
    /// `∂x^dx ∂y^dy` of the field at `p`.
    fn derivative(&self, p: &Point, dx: usize, dy: usize) -> f64;

    fn value(&self, p: &Point) -> f64 {
        self.derivative(p, 0, 0)
    }

    fn gradient(&self, p: &Point) -> [f64; 2] {
        [self.derivative(p, 1, 0), self.derivative(p, 0, 1)]
    }

    /// `(∂xx, ∂yy, ∂xy)`.
    fn hessian(&self, p: &Point) -> [f64; 3] {
        [self.derivative(p, 2, 0), self.derivative(p, 0, 2), self.derivative(p, 1, 1)]
    }
}

/// Polynomial in `(x - x0, y - y0)` stored as monomial terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial2 {
    pub origin: Point,
    pub terms: Vec<((usize, usize), f64)>,
}

impl Polynomial2 {
    pub fn new(terms: Vec<((usize, usize), f64)>) -> Self {
        Polynomial2 { origin: Point::origin(), terms }
    }

    pub fn with_origin(origin: Point, terms: Vec<((usize, usize), f64)>) -> Self {
        Polynomial2 { origin, terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![((0, 0), c)])
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().filter(|(_, c)| *c != 0.0).map(|((a, b), _)| a + b).max().unwrap_or(0)
    }

    /// Product of two polynomials sharing an origin.
    pub fn mul(&self, other: &Polynomial2) -> Polynomial2 {
        assert_eq!(self.origin, other.origin);
        let mut terms = Vec::new();
        for &((a, b), c) in &self.terms {
            for &((d, e), f) in &other.terms {
                terms.push(((a + d, b + e), c * f));
            }
        }
        Polynomial2 { origin: self.origin, terms }
    }
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

impl ScalarField for Polynomial2 {
    fn derivative(&self, p: &Point, dx: usize, dy: usize) -> f64 {
        let x = p.x - self.origin.x;
        let y = p.y - self.origin.y;
        self.terms
            .iter()
            .filter(|((a, b), _)| *a >= dx && *b >= dy)
            .map(|&((a, b), c)| c * falling(a, dx) * falling(b, dy) * x.powi((a - dx) as i32) * y.powi((b - dy) as i32))
            .sum()
    }
}

/// `amplitude · sin(ax·x + bx) · sin(ay·y + by)`.
#[derive(Debug, Clone, Copy)]
pub struct SinProduct {
    pub amplitude: f64,
    pub ax: f64,
    pub bx: f64,
    pub ay: f64,
    pub by: f64,
}

impl ScalarField for SinProduct {
    fn derivative(&self, p: &Point, dx: usize, dy: usize) -> f64 {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let fx = self.ax.powi(dx as i32) * (self.ax * p.x + self.bx + dx as f64 * half_pi).sin();
        let fy = self.ay.powi(dy as i32) * (self.ay * p.y + self.by + dy as f64 * half_pi).sin();
        self.amplitude * fx * fy
    }
}

/// Field given by a closure for values and one for `(dx, dy)` derivatives.
pub struct FnField<F>(pub F)
where
    F: Fn(&Point, usize, usize) -> f64 + Sync;

impl<F> ScalarField for FnField<F>
where
    F: Fn(&Point, usize, usize) -> f64 + Sync,
{
    fn derivative(&self, p: &Point, dx: usize, dy: usize) -> f64 {
        (self.0)(p, dx, dy)
    }
}
