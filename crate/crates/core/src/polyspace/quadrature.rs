//! Gauss–Legendre rules on segments and collapsed (Duffy) rules on triangles
//! and polygons.

use crate::mesh::Point;

/// A 2D quadrature rule.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Polynomials of total degree up to this value are integrated exactly.
    pub exactness: usize,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// A quadrature rule on a straight face, with the reference coordinate
/// `tau ∈ [-1, 1]` of each point kept alongside.
#[derive(Debug, Clone)]
pub struct FaceQuadrature {
    pub points: Vec<Point>,
    pub tau: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl FaceQuadrature {
    /// `n`-point Gauss–Legendre rule on the segment `[a, b]`.
    pub fn gauss(a: Point, b: Point, n: usize) -> Self {
        let (nodes, w) = gauss_legendre(n);
        let half = 0.5 * (b - a).norm();
        let points = nodes.iter().map(|&t| a + (b - a) * (0.5 * (t + 1.0))).collect();
        FaceQuadrature {
            points,
            tau: nodes,
            weights: w.iter().map(|wi| wi * half).collect(),
            exactness: 2 * n - 1,
        }
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Values of `P_0, ..., P_n` at `x`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(1.0);
    if n >= 1 {
        v.push(x);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p = ((2.0 * kf - 1.0) * x * v[k - 1] - (kf - 1.0) * v[k - 2]) / kf;
        v.push(p);
    }
    v
}

/// Collapsed Gauss rule on a triangle, exact for total degree `exactness`.
pub fn triangle_quadrature(tri: [Point; 3], exactness: usize) -> Quadrature {
    let mut q = Quadrature { points: Vec::new(), weights: Vec::new(), exactness };
    push_triangle(&mut q, tri);
    q
}

fn push_triangle(q: &mut Quadrature, tri: [Point; 3]) {
    // x = a + u (b - a) + v (1 - u) (c - a), Jacobian 2|T| (1 - u)
    let n = (q.exactness + 2).div_ceil(2).max(1);
    let (nodes, w) = gauss_legendre(n);
    let [a, b, c] = tri;
    let jac = (b - a).perp(&(c - a)).abs();
    for i in 0..n {
        let u = 0.5 * (nodes[i] + 1.0);
        let wu = 0.5 * w[i];
        for j in 0..n {
            let v = 0.5 * (nodes[j] + 1.0);
            let wv = 0.5 * w[j];
            q.points.push(a + (b - a) * u + (c - a) * (v * (1.0 - u)));
            q.weights.push(wu * wv * (1.0 - u) * jac);
        }
    }
}

/// Quadrature on a star-shaped polygon with respect to `center`: triangles
/// are integrated directly, other polygons through a fan from `center`.
pub fn polygon_quadrature(vertices: &[Point], center: Point, exactness: usize) -> Quadrature {
    let mut q = Quadrature { points: Vec::new(), weights: Vec::new(), exactness };
    if vertices.len() == 3 {
        push_triangle(&mut q, [vertices[0], vertices[1], vertices[2]]);
    } else {
        let m = vertices.len();
        for i in 0..m {
            push_triangle(&mut q, [center, vertices[i], vertices[(i + 1) % m]]);
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                assert!((q - exact).abs() < 1e-14, "n={n} d={d}: {q} vs {exact}");
            }
            assert!(w.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn reference_triangle_monomials() {
        // ∫ x^a y^b over the reference triangle = a! b! / (a + b + 2)!
        let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        let tri = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        for p in 0..=14 {
            let q = triangle_quadrature(tri, p);
            for a in 0..=p {
                let b = p - a;
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let v = q.integrate(|x| x.x.powi(a as i32) * x.y.powi(b as i32));
                assert!(((v - exact) / exact).abs() < 1e-12, "a={a} b={b}");
            }
        }
        let q = triangle_quadrature(tri, 0);
        assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_square_x_squared() {
        let sq = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        let q = polygon_quadrature(&sq, Point::new(0.5, 0.5), 2);
        assert!((q.integrate(|p| p.x * p.x) - 1.0 / 3.0).abs() < 1e-15);
        assert!(q.weights.iter().all(|&w| w > 0.0));
        assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
