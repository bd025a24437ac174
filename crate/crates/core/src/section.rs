//! Rectangular cross section `[0, x0] x [0, y0]`, node-centred grid fields and
//! the discrete calculus used by the solvers and the verifier.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::material::{Sym2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub x0: f64,
    pub y0: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

/// One side of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    /// `y = 0`
    Bottom,
    /// `x = x0`
    Right,
    /// `y = y0`
    Top,
    /// `x = 0`
    Left,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Bottom, Edge::Right, Edge::Top, Edge::Left];

    pub fn normal(self) -> Vec2 {
        match self {
            Edge::Bottom => Vec2::new(0.0, -1.0),
            Edge::Right => Vec2::new(1.0, 0.0),
            Edge::Top => Vec2::new(0.0, 1.0),
            Edge::Left => Vec2::new(-1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    #[default]
    Simpson,
    Trapezoid,
}

/// Area, centroid `r_B` and Euler tensor of inertia `J_B` (about the centroid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaData {
    pub area: f64,
    pub centroid: Vec2,
    pub euler: Sym2,
}

impl InertiaData {
    pub fn apply_euler(&self, v: Vec2) -> Vec2 {
        self.euler.apply(v)
    }

    pub fn solve_euler(&self, q: Vec2) -> Vec2 {
        let e = self.euler;
        let det = e.xx * e.yy - e.xy * e.xy;
        Vec2::new((e.yy * q.x - e.xy * q.y) / det, (e.xx * q.y - e.xy * q.x) / det)
    }
}

impl Section {
    pub fn build(x0: f64, y0: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(x0.is_finite() && y0.is_finite()) || x0 <= 0.0 || y0 <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "section size must be positive, got {x0} x {y0}"
            )));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGeometry(format!(
                "need at least 3 nodes per axis, got {nx} x {ny}"
            )));
        }
        Ok(Section {
            x0,
            y0,
            nx,
            ny,
            hx: x0 / (nx - 1) as f64,
            hy: y0 / (ny - 1) as f64,
        })
    }

    /// Same rectangle with `n` nodes per axis.
    pub fn with_nodes(&self, nx: usize, ny: usize) -> Result<Self> {
        Section::build(self.x0, self.y0, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Node coordinates. The last node of each axis is placed exactly on the edge.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        let x = if i + 1 == self.nx { self.x0 } else { i as f64 * self.hx };
        let y = if j + 1 == self.ny { self.y0 } else { j as f64 * self.hy };
        Vec2::new(x, y)
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    pub fn diameter(&self) -> f64 {
        self.x0.hypot(self.y0)
    }

    /// Largest spacing.
    pub fn h(&self) -> f64 {
        self.hx.max(self.hy)
    }

    /// Node count along an edge.
    pub fn edge_len(&self, e: Edge) -> usize {
        match e {
            Edge::Bottom | Edge::Top => self.nx,
            Edge::Left | Edge::Right => self.ny,
        }
    }

    /// Grid indices of the `t`-th node along edge `e` (increasing x or y).
    pub fn edge_node(&self, e: Edge, t: usize) -> (usize, usize) {
        match e {
            Edge::Bottom => (t, 0),
            Edge::Top => (t, self.ny - 1),
            Edge::Left => (0, t),
            Edge::Right => (self.nx - 1, t),
        }
    }

    pub fn edge_spacing(&self, e: Edge) -> f64 {
        match e {
            Edge::Bottom | Edge::Top => self.hx,
            Edge::Left | Edge::Right => self.hy,
        }
    }

    pub fn inertia(&self) -> InertiaData {
        inertia(self)
    }

    /// `(nx-2)(ny-2)` interior node indices in row-major order.
    pub fn interior_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.ny - 1).flat_map(move |j| (1..self.nx - 1).map(move |i| (i, j)))
    }
}

/// Analytic rectangle values.
pub fn inertia(s: &Section) -> InertiaData {
    let (a, b) = (s.x0, s.y0);
    InertiaData {
        area: a * b,
        centroid: Vec2::new(0.5 * a, 0.5 * b),
        euler: Sym2::new(a * a * a * b / 12.0, 0.0, a * b * b * b / 12.0),
    }
}

/// Outward unit normal(s) at a boundary node; corners return both edge normals.
pub fn boundary_normal(s: &Section, i: usize, j: usize) -> Result<Vec<Vec2>> {
    if i >= s.nx || j >= s.ny || !s.is_boundary(i, j) {
        return Err(Error::NotBoundaryNode(i, j));
    }
    let mut out = Vec::with_capacity(2);
    if i == 0 {
        out.push(Edge::Left.normal());
    }
    if i + 1 == s.nx {
        out.push(Edge::Right.normal());
    }
    if j == 0 {
        out.push(Edge::Bottom.normal());
    }
    if j + 1 == s.ny {
        out.push(Edge::Top.normal());
    }
    Ok(out)
}

/// Integer coefficients `c` and divisor `d` of a 1-D composite rule, so the
/// weights are `h c_k / d`.
fn rule_coefficients(n: usize, rule: Quadrature) -> Result<(Vec<f64>, f64)> {
    match rule {
        Quadrature::Trapezoid => {
            let mut c = vec![2.0; n];
            c[0] = 1.0;
            c[n - 1] = 1.0;
            Ok((c, 2.0))
        }
        Quadrature::Simpson => {
            if n % 2 == 0 {
                return Err(Error::QuadratureOrderUnavailable);
            }
            let c = (0..n)
                .map(|k| if k == 0 || k == n - 1 { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 })
                .collect();
            Ok((c, 3.0))
        }
    }
}

/// 1-D composite quadrature weights for `n` nodes with spacing `h`.
pub fn weights_1d(n: usize, h: f64, rule: Quadrature) -> Result<Vec<f64>> {
    let (c, d) = rule_coefficients(n, rule)?;
    Ok(c.into_iter().map(|c| h * c / d).collect())
}

/// Simpson when both node counts are odd, trapezoid otherwise.
pub fn best_rule(s: &Section) -> Quadrature {
    if s.nx % 2 == 1 && s.ny % 2 == 1 {
        Quadrature::Simpson
    } else {
        Quadrature::Trapezoid
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub section: Section,
    pub values: Vec<f64>,
}

impl ScalarField2D {
    pub fn zeros(s: &Section) -> Self {
        ScalarField2D { section: *s, values: vec![0.0; s.len()] }
    }

    pub fn constant(s: &Section, c: f64) -> Self {
        ScalarField2D { section: *s, values: vec![c; s.len()] }
    }

    pub fn from_fn(s: &Section, f: impl Fn(Vec2) -> f64) -> Self {
        let mut values = Vec::with_capacity(s.len());
        for j in 0..s.ny {
            for i in 0..s.nx {
                values.push(f(s.point(i, j)));
            }
        }
        ScalarField2D { section: *s, values }
    }

    pub fn from_values(s: &Section, values: Vec<f64>) -> Result<Self> {
        if values.len() != s.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField2D { section: *s, values })
    }

    /// `a + b . r`
    pub fn affine(s: &Section, a: f64, b: Vec2) -> Self {
        Self::from_fn(s, |p| a + b.dot(p))
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.section.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.section.idx(i, j);
        self.values[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField2D {
            section: self.section,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a*self + b*other`
    pub fn lin(&self, a: f64, other: &ScalarField2D, b: f64) -> Result<Self> {
        check_same(&self.section, &other.section)?;
        Ok(ScalarField2D {
            section: self.section,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &ScalarField2D) -> Result<f64> {
        check_same(&self.section, &other.section)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn has_nan(&self) -> bool {
        self.values.iter().any(|v| !v.is_finite())
    }

    /// Values on the four edges.
    pub fn trace(&self) -> EdgeTrace {
        EdgeTrace::from_nodes(&self.section, |i, j| self.at(i, j))
    }

    /// Area average with the best available rule.
    pub fn mean(&self) -> f64 {
        let s = &self.section;
        integrate_area(self, best_rule(s)).unwrap_or(0.0) / (s.x0 * s.y0)
    }
}

impl Add<&ScalarField2D> for &ScalarField2D {
    type Output = ScalarField2D;
    fn add(self, o: &ScalarField2D) -> ScalarField2D {
        self.lin(1.0, o, 1.0).expect("grid mismatch")
    }
}

impl Sub<&ScalarField2D> for &ScalarField2D {
    type Output = ScalarField2D;
    fn sub(self, o: &ScalarField2D) -> ScalarField2D {
        self.lin(1.0, o, -1.0).expect("grid mismatch")
    }
}

impl Mul<f64> for &ScalarField2D {
    type Output = ScalarField2D;
    fn mul(self, s: f64) -> ScalarField2D {
        self.map(|v| v * s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    pub section: Section,
    pub values: Vec<Vec2>,
}

impl VectorField2D {
    pub fn zeros(s: &Section) -> Self {
        VectorField2D { section: *s, values: vec![Vec2::ZERO; s.len()] }
    }

    pub fn from_fn(s: &Section, f: impl Fn(Vec2) -> Vec2) -> Self {
        let mut values = Vec::with_capacity(s.len());
        for j in 0..s.ny {
            for i in 0..s.nx {
                values.push(f(s.point(i, j)));
            }
        }
        VectorField2D { section: *s, values }
    }

    pub fn from_components(x: &ScalarField2D, y: &ScalarField2D) -> Result<Self> {
        check_same(&x.section, &y.section)?;
        Ok(VectorField2D {
            section: x.section,
            values: x.values.iter().zip(&y.values).map(|(&a, &b)| Vec2::new(a, b)).collect(),
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Vec2 {
        self.values[j * self.section.nx + i]
    }

    pub fn x(&self) -> ScalarField2D {
        ScalarField2D { section: self.section, values: self.values.iter().map(|v| v.x).collect() }
    }

    pub fn y(&self) -> ScalarField2D {
        ScalarField2D { section: self.section, values: self.values.iter().map(|v| v.y).collect() }
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &VectorField2D) -> Result<f64> {
        check_same(&self.section, &other.section)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((*a - *b).norm())))
    }

    pub fn lin(&self, a: f64, other: &VectorField2D, b: f64) -> Result<Self> {
        check_same(&self.section, &other.section)?;
        Ok(VectorField2D {
            section: self.section,
            values: self.values.iter().zip(&other.values).map(|(&p, &q)| p * a + q * b).collect(),
        })
    }

    /// Normal component on each edge (corners get one value per edge).
    pub fn normal_trace(&self) -> EdgeTrace {
        let s = self.section;
        let mut t = EdgeTrace::zeros(&s);
        for e in Edge::ALL {
            let n = e.normal();
            for k in 0..s.edge_len(e) {
                let (i, j) = s.edge_node(e, k);
                t.edge_mut(e)[k] = self.at(i, j).dot(n);
            }
        }
        t
    }

    pub fn has_nan(&self) -> bool {
        self.values.iter().any(|v| !v.is_finite())
    }
}

/// Values on the boundary, stored edge by edge in increasing x or y.
///
/// Corner nodes belong to both adjacent edges. For Dirichlet data the two
/// copies must agree; for flux data they carry the two one-sided normals.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTrace {
    pub bottom: Vec<f64>,
    pub right: Vec<f64>,
    pub top: Vec<f64>,
    pub left: Vec<f64>,
}

impl EdgeTrace {
    pub fn zeros(s: &Section) -> Self {
        EdgeTrace {
            bottom: vec![0.0; s.nx],
            right: vec![0.0; s.ny],
            top: vec![0.0; s.nx],
            left: vec![0.0; s.ny],
        }
    }

    /// Samples `f(point, edge)` at every edge node.
    pub fn from_fn(s: &Section, f: impl Fn(Vec2, Edge) -> f64) -> Self {
        let mut t = EdgeTrace::zeros(s);
        for e in Edge::ALL {
            for k in 0..s.edge_len(e) {
                let (i, j) = s.edge_node(e, k);
                t.edge_mut(e)[k] = f(s.point(i, j), e);
            }
        }
        t
    }

    fn from_nodes(s: &Section, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut t = EdgeTrace::zeros(s);
        for e in Edge::ALL {
            for k in 0..s.edge_len(e) {
                let (i, j) = s.edge_node(e, k);
                t.edge_mut(e)[k] = f(i, j);
            }
        }
        t
    }

    pub fn edge(&self, e: Edge) -> &[f64] {
        match e {
            Edge::Bottom => &self.bottom,
            Edge::Right => &self.right,
            Edge::Top => &self.top,
            Edge::Left => &self.left,
        }
    }

    pub fn edge_mut(&mut self, e: Edge) -> &mut Vec<f64> {
        match e {
            Edge::Bottom => &mut self.bottom,
            Edge::Right => &mut self.right,
            Edge::Top => &mut self.top,
            Edge::Left => &mut self.left,
        }
    }

    pub fn matches(&self, s: &Section) -> bool {
        self.bottom.len() == s.nx
            && self.top.len() == s.nx
            && self.left.len() == s.ny
            && self.right.len() == s.ny
    }

    pub fn is_finite(&self) -> bool {
        Edge::ALL.iter().all(|&e| self.edge(e).iter().all(|v| v.is_finite()))
    }

    /// Largest disagreement between the two copies of each corner value.
    pub fn corner_mismatch(&self) -> f64 {
        let (nb, nl) = (self.bottom.len(), self.left.len());
        [
            self.bottom[0] - self.left[0],
            self.bottom[nb - 1] - self.right[0],
            self.top[0] - self.left[nl - 1],
            self.top[nb - 1] - self.right[nl - 1],
        ]
        .iter()
        .fold(0.0, |m: f64, d| m.max(d.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        Edge::ALL
            .iter()
            .flat_map(|&e| self.edge(e).iter())
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        EdgeTrace {
            bottom: self.bottom.iter().map(|&v| f(v)).collect(),
            right: self.right.iter().map(|&v| f(v)).collect(),
            top: self.top.iter().map(|&v| f(v)).collect(),
            left: self.left.iter().map(|&v| f(v)).collect(),
        }
    }
}

pub(crate) fn check_same(a: &Section, b: &Section) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

pub fn integrate_area(f: &ScalarField2D, rule: Quadrature) -> Result<f64> {
    let s = &f.section;
    let (cx, dx) = rule_coefficients(s.nx, rule)?;
    let (cy, dy) = rule_coefficients(s.ny, rule)?;
    let mut total = 0.0;
    for j in 0..s.ny {
        let mut row = 0.0;
        for i in 0..s.nx {
            row += cx[i] * f.at(i, j);
        }
        total += cy[j] * row;
    }
    Ok(total * (s.hx * s.hy) / (dx * dy))
}

/// Line integral of a trace over the whole boundary, edge by edge.
pub fn integrate_boundary(s: &Section, g: &EdgeTrace, rule: Quadrature) -> Result<f64> {
    if !g.matches(s) {
        return Err(Error::GridMismatch);
    }
    let mut total = 0.0;
    for e in Edge::ALL {
        let (c, d) = rule_coefficients(s.edge_len(e), rule)?;
        let sum: f64 = c.iter().zip(g.edge(e)).map(|(a, b)| a * b).sum();
        total += sum * s.edge_spacing(e) / d;
    }
    Ok(total)
}

#[inline]
fn d_axis(f: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    if k == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if k + 1 == n {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(k + 1) - f(k - 1)) / (2.0 * h)
    }
}

/// `d/dx` at node `(i, j)`: central inside, second-order one-sided on the edges.
#[inline]
pub fn ddx(f: &ScalarField2D, i: usize, j: usize) -> f64 {
    let s = &f.section;
    d_axis(|k| f.at(k, j), i, s.nx, s.hx)
}

#[inline]
pub fn ddy(f: &ScalarField2D, i: usize, j: usize) -> f64 {
    let s = &f.section;
    d_axis(|k| f.at(i, k), j, s.ny, s.hy)
}

pub fn gradient(f: &ScalarField2D) -> VectorField2D {
    let s = f.section;
    let mut values = Vec::with_capacity(s.len());
    for j in 0..s.ny {
        for i in 0..s.nx {
            values.push(Vec2::new(ddx(f, i, j), ddy(f, i, j)));
        }
    }
    VectorField2D { section: s, values }
}

pub fn divergence(v: &VectorField2D) -> ScalarField2D {
    let s = v.section;
    let (vx, vy) = (v.x(), v.y());
    let mut values = Vec::with_capacity(s.len());
    for j in 0..s.ny {
        for i in 0..s.nx {
            values.push(ddx(&vx, i, j) + ddy(&vy, i, j));
        }
    }
    ScalarField2D { section: s, values }
}

/// 5-point Laplacian at `(i, j)`; the node must be interior.
#[inline]
pub fn laplacian_at(f: &ScalarField2D, i: usize, j: usize) -> f64 {
    let s = &f.section;
    let c = f.at(i, j);
    (f.at(i + 1, j) - 2.0 * c + f.at(i - 1, j)) / (s.hx * s.hx)
        + (f.at(i, j + 1) - 2.0 * c + f.at(i, j - 1)) / (s.hy * s.hy)
}

/// 5-point Laplacian on interior nodes; boundary entries are left at zero.
pub fn laplacian(f: &ScalarField2D) -> ScalarField2D {
    let s = f.section;
    let mut out = ScalarField2D::zeros(&s);
    for (i, j) in s.interior_nodes() {
        out.set(i, j, laplacian_at(f, i, j));
    }
    out
}
