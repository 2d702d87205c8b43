//! Two-component meshes of the cylinder `Q = ]0,L[ x ]-l,l[`.
//!
//! The domain is split by an interface into an upper (plus) and a lower
//! (minus) component. Interface trace nodes are duplicated into
//! (plus, minus) pairs with identical coordinates so the jump is an honest
//! pair of degrees of freedom. Three builders:
//!
//! * [`build_rough_mesh`] - terrain-following structured triangulation with
//!   the interface at `x_N = eps^k g(x'/eps)`,
//! * [`build_flat_mesh`] - same data model with the interface at `x_N = 0`,
//! * [`build_single_mesh`] - one continuous component (no duplicated trace
//!   nodes), used by the perfect-transmission limit problem.
//!
//! Node ids run row by row (the x' index fastest) per component, minus block
//! first, which is also the dump order.

use crate::error::{Error, Result};
use crate::profile::InterfaceProfile;
use crate::rational::Rational;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Geometric and scaling parameters of one problem instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainSpec {
    /// Length `L` of the cross section `]0,L[`.
    pub length: Rational,
    /// Half-height `l > 0`.
    pub half_height: Rational,
    /// Oscillation period `eps > 0`.
    pub eps: Rational,
    /// Amplitude exponent `k > 0`.
    pub k: Rational,
    /// Interface scaling exponent `gamma` (any sign).
    pub gamma: Rational,
}

impl DomainSpec {
    pub fn length_f(&self) -> f64 {
        self.length.to_f64()
    }

    pub fn half_height_f(&self) -> f64 {
        self.half_height.to_f64()
    }

    pub fn eps_f(&self) -> f64 {
        self.eps.to_f64()
    }

    pub fn k_f(&self) -> f64 {
        self.k.to_f64()
    }

    pub fn gamma_f(&self) -> f64 {
        self.gamma.to_f64()
    }

    /// Amplitude factor `eps^k`.
    pub fn amplitude(&self) -> f64 {
        libm::pow(self.eps_f(), self.k_f())
    }

    /// Interface weight `eps^gamma`.
    pub fn coupling_weight(&self) -> f64 {
        libm::pow(self.eps_f(), self.gamma_f())
    }

    /// Number of whole periods across the cross section, exact.
    pub fn periods(&self) -> Result<i64> {
        let q = self.length.div(self.eps)?;
        if !q.is_integer() || !q.is_positive() {
            return Err(Error::Validation(format!(
                "eps = {} must divide L = {} a whole number of times (got {})",
                self.eps, self.length, q
            )));
        }
        Ok(q.num())
    }

    pub fn validate(&self, profile: &InterfaceProfile) -> Result<()> {
        if !self.length.is_positive() {
            return Err(Error::Validation(format!("L must be positive, got {}", self.length)));
        }
        if !self.half_height.is_positive() {
            return Err(Error::Validation(format!(
                "half-height must be positive, got {}",
                self.half_height
            )));
        }
        if !self.eps.is_positive() {
            return Err(Error::Validation(format!("eps must be positive, got {}", self.eps)));
        }
        if !self.k.is_positive() {
            return Err(Error::Validation(format!("k must be positive, got {}", self.k)));
        }
        self.periods()?;
        profile.validate()?;
        let top = self.amplitude() * profile.max_value();
        if top >= self.half_height_f() {
            return Err(Error::Geometry(format!(
                "interface exits the box: eps^k max g = {top} >= l = {}",
                self.half_height_f()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Component {
    Plus,
    Minus,
}

impl Component {
    pub fn tag(&self) -> char {
        match self {
            Component::Plus => '+',
            Component::Minus => '-',
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Triangle {
    pub nodes: [usize; 3],
    pub tag: Component,
}

/// One duplicated interface node: same coordinates, one DOF per side.
/// `weight` is the lumped surface measure of the polyline around the pair.
#[derive(Clone, Copy, Debug)]
pub struct InterfacePair {
    pub plus: usize,
    pub minus: usize,
    pub x: f64,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct TwoComponentMesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    pub pairs: Vec<InterfacePair>,
    /// Dirichlet flag per node (`true` on the outer boundary of `Q`).
    pub boundary: Vec<bool>,
    /// Sum of signed triangle areas per component.
    pub area_plus: f64,
    pub area_minus: f64,
    /// Exact polygon areas enclosed by the interface polyline.
    pub polygon_area_plus: f64,
    pub polygon_area_minus: f64,
    /// Length of the interface polyline.
    pub interface_length: f64,
}

impl TwoComponentMesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|b| **b).count()
    }

    pub fn triangle_area(&self, t: &Triangle) -> f64 {
        let [a, b, c] = t.nodes;
        let (p, q, r) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut m: f64 = 0.0;
        for t in &self.triangles {
            for e in 0..3 {
                let p = self.nodes[t.nodes[e]];
                let q = self.nodes[t.nodes[(e + 1) % 3]];
                m = m.max(libm::hypot(q[0] - p[0], q[1] - p[1]));
            }
        }
        m
    }
}

struct GridLayout {
    nx: usize,
    ny: usize,
}

impl GridLayout {
    // row-major ids: the x' index runs fastest
    fn id(&self, i: usize, j: usize) -> usize {
        i * (self.nx + 1) + j
    }

    fn count(&self) -> usize {
        (self.ny + 1) * (self.nx + 1)
    }
}

/// Shared generator: one component per vertical block, interface heights
/// given per column.
fn build_two_component(
    length: f64,
    half_height: f64,
    heights: &[f64],
    ny: usize,
) -> TwoComponentMesh {
    let nx = heights.len() - 1;
    let layout = GridLayout { nx, ny };
    let n_per = layout.count();
    let mut nodes = Vec::with_capacity(2 * n_per);
    let mut boundary = vec![false; 2 * n_per];

    let xs: Vec<f64> = (0..=nx).map(|j| length * j as f64 / nx as f64).collect();

    // minus block: from -l up to the interface
    for i in 0..=ny {
        let t = i as f64 / ny as f64;
        for j in 0..=nx {
            let y = -half_height * (1.0 - t) + heights[j] * t;
            nodes.push([xs[j], y]);
            let id = layout.id(i, j);
            if j == 0 || j == nx || i == 0 {
                boundary[id] = true;
            }
        }
    }
    // plus block: from the interface up to +l
    for i in 0..=ny {
        let t = i as f64 / ny as f64;
        for j in 0..=nx {
            let y = heights[j] * (1.0 - t) + half_height * t;
            nodes.push([xs[j], y]);
            let id = n_per + layout.id(i, j);
            if j == 0 || j == nx || i == ny {
                boundary[id] = true;
            }
        }
    }

    let mut triangles = Vec::with_capacity(4 * nx * ny);
    for (offset, tag) in [(0, Component::Minus), (n_per, Component::Plus)] {
        for i in 0..ny {
            for j in 0..nx {
                let a = offset + layout.id(i, j);
                let b = offset + layout.id(i, j + 1);
                let c = offset + layout.id(i + 1, j + 1);
                let d = offset + layout.id(i + 1, j);
                triangles.push(Triangle { nodes: [a, b, c], tag });
                triangles.push(Triangle { nodes: [a, c, d], tag });
            }
        }
    }

    // interface pairs, sorted by x' by construction
    let edge_lengths: Vec<f64> = (0..nx)
        .map(|j| libm::hypot(xs[j + 1] - xs[j], heights[j + 1] - heights[j]))
        .collect();
    let mut pairs = Vec::with_capacity(nx + 1);
    for j in 0..=nx {
        let mut w = 0.0;
        if j > 0 {
            w += 0.5 * edge_lengths[j - 1];
        }
        if j < nx {
            w += 0.5 * edge_lengths[j];
        }
        pairs.push(InterfacePair {
            plus: n_per + layout.id(0, j),
            minus: layout.id(ny, j),
            x: xs[j],
            weight: w,
        });
    }

    let mut mesh = TwoComponentMesh {
        nodes,
        triangles,
        pairs,
        boundary,
        area_plus: 0.0,
        area_minus: 0.0,
        polygon_area_plus: 0.0,
        polygon_area_minus: 0.0,
        interface_length: edge_lengths.iter().sum(),
    };
    for t in &mesh.triangles {
        let a = mesh.triangle_area(t);
        match t.tag {
            Component::Plus => mesh.area_plus += a,
            Component::Minus => mesh.area_minus += a,
        }
    }
    // trapezoid area of the polyline polygon, exact for the discrete interface
    let dx = length / nx as f64;
    let mut below = 0.0;
    for j in 0..nx {
        below += 0.5 * (heights[j] + heights[j + 1]) * dx;
    }
    mesh.polygon_area_minus = half_height * length + below;
    mesh.polygon_area_plus = half_height * length - below;
    mesh
}

/// Terrain-following structured triangulation of `Q` split by the rough
/// interface `x_N = eps^k g(x'/eps)`.
///
/// Columns sit at `j * eps / nx_per_period`; the profile is sampled at the
/// exact phase `(j mod nx_per_period) / nx_per_period`, so equal-phase
/// columns get bit-identical heights. For the sawtooth preset the kink
/// abscissae (multiples of 1/4) must be grid points, hence
/// `nx_per_period % 4 == 0` is required there.
pub fn build_rough_mesh(
    domain: &DomainSpec,
    profile: &InterfaceProfile,
    nx_per_period: usize,
    ny: usize,
) -> Result<TwoComponentMesh> {
    domain.validate(profile)?;
    if nx_per_period < 8 {
        return Err(Error::Validation(format!(
            "nx_per_period must be at least 8 to resolve each oscillation, got {nx_per_period}"
        )));
    }
    if ny < 4 {
        return Err(Error::Validation(format!(
            "ny must be at least 4 per component, got {ny}"
        )));
    }
    for kink in profile.kinks() {
        let pos = kink * nx_per_period as f64;
        if (pos - libm::round(pos)).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "profile kink at y'={kink} does not align with the column grid; \
                 choose nx_per_period so every kink is a grid point"
            )));
        }
    }
    let periods = domain.periods()? as usize;
    let nx = periods * nx_per_period;
    let amp = domain.amplitude();
    let heights: Vec<f64> = (0..=nx)
        .map(|j| {
            let phase = (j % nx_per_period) as f64 / nx_per_period as f64;
            amp * profile.eval(phase).0
        })
        .collect();
    Ok(build_two_component(
        domain.length_f(),
        domain.half_height_f(),
        &heights,
        ny,
    ))
}

/// Two-component mesh with the flat interface at `x_N = 0`.
pub fn build_flat_mesh(domain: &DomainSpec, nx: usize, ny: usize) -> Result<TwoComponentMesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::Validation(format!(
            "flat mesh needs nx, ny >= 2, got nx={nx}, ny={ny}"
        )));
    }
    if !domain.length.is_positive() || !domain.half_height.is_positive() {
        return Err(Error::Validation("domain dimensions must be positive".into()));
    }
    let heights = vec![0.0; nx + 1];
    Ok(build_two_component(
        domain.length_f(),
        domain.half_height_f(),
        &heights,
        ny,
    ))
}

/// Continuous mesh of the whole cylinder (no duplicated trace nodes); the
/// node row at `x_N = 0` is shared. Triangles keep a component tag by sign.
pub fn build_single_mesh(domain: &DomainSpec, nx: usize, ny: usize) -> Result<TwoComponentMesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::Validation(format!(
            "single mesh needs nx, ny >= 2, got nx={nx}, ny={ny}"
        )));
    }
    let length = domain.length_f();
    let half_height = domain.half_height_f();
    let layout = GridLayout { nx, ny: 2 * ny };
    let rows = 2 * ny;
    let mut nodes = Vec::with_capacity(layout.count());
    let mut boundary = vec![false; layout.count()];
    for i in 0..=rows {
        let t = i as f64 / rows as f64;
        for j in 0..=nx {
            let x = length * j as f64 / nx as f64;
            let y = -half_height * (1.0 - t) + half_height * t;
            nodes.push([x, y]);
            if j == 0 || j == nx || i == 0 || i == rows {
                boundary[layout.id(i, j)] = true;
            }
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * rows);
    for i in 0..rows {
        let tag = if i < ny { Component::Minus } else { Component::Plus };
        for j in 0..nx {
            let a = layout.id(i, j);
            let b = layout.id(i, j + 1);
            let c = layout.id(i + 1, j + 1);
            let d = layout.id(i + 1, j);
            triangles.push(Triangle { nodes: [a, b, c], tag });
            triangles.push(Triangle { nodes: [a, c, d], tag });
        }
    }
    let mut mesh = TwoComponentMesh {
        nodes,
        triangles,
        pairs: Vec::new(),
        boundary,
        area_plus: 0.0,
        area_minus: 0.0,
        polygon_area_plus: half_height * length,
        polygon_area_minus: half_height * length,
        interface_length: 0.0,
    };
    for t in &mesh.triangles {
        let a = mesh.triangle_area(t);
        match t.tag {
            Component::Plus => mesh.area_plus += a,
            Component::Minus => mesh.area_minus += a,
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_domain(eps: Rational, k: Rational, gamma: Rational) -> DomainSpec {
        DomainSpec {
            length: Rational::ONE,
            half_height: Rational::ONE,
            eps,
            k,
            gamma,
        }
    }

    #[test]
    fn flat_profile_rough_mesh() {
        // g = 1, eps = 1/4, k = 2: horizontal interface at 0.0625
        let domain = unit_domain(Rational::new(1, 4), Rational::from_int(2), Rational::ZERO);
        let profile = InterfaceProfile::flat(1.0);
        let mesh = build_rough_mesh(&domain, &profile, 8, 4).unwrap();
        assert_eq!(mesh.pairs.len(), 4 * 8 + 1);
        for p in &mesh.pairs {
            let yp = mesh.nodes[p.plus][1];
            let ym = mesh.nodes[p.minus][1];
            assert_eq!(yp, 0.0625);
            assert_eq!(ym, 0.0625);
            assert_eq!(mesh.nodes[p.plus][0], mesh.nodes[p.minus][0]);
        }
        assert!((mesh.interface_length - 1.0).abs() < 1e-12);
        // pairs strictly increasing in x, endpoints Dirichlet
        for w in mesh.pairs.windows(2) {
            assert!(w[1].x > w[0].x);
        }
        let first = &mesh.pairs[0];
        let last = mesh.pairs.last().unwrap();
        assert!(mesh.boundary[first.plus] && mesh.boundary[first.minus]);
        assert!(mesh.boundary[last.plus] && mesh.boundary[last.minus]);
    }

    #[test]
    fn sine_interface_longer_than_projection() {
        let domain = unit_domain(Rational::new(1, 4), Rational::ONE, Rational::ZERO);
        let mesh = build_rough_mesh(&domain, &InterfaceProfile::sine(), 16, 4).unwrap();
        assert!(mesh.interface_length > 1.0);
    }

    #[test]
    fn component_areas_match_polygon_and_total() {
        let domain = unit_domain(Rational::new(1, 4), Rational::ONE, Rational::ZERO);
        let mesh = build_rough_mesh(&domain, &InterfaceProfile::sine(), 64, 5).unwrap();
        let total = mesh.area_plus + mesh.area_minus;
        assert!((total - 2.0).abs() < 1e-12 * 2.0);
        assert!((mesh.area_plus - mesh.polygon_area_plus).abs() < 1e-12 * mesh.area_plus);
        assert!((mesh.area_minus - mesh.polygon_area_minus).abs() < 1e-12 * mesh.area_minus);
        // area(Q_eps^-) = L*l + eps^k * L * mean(g), spectrally accurate here
        let expected = 1.0 + 0.25 * 1.0;
        assert!(
            (mesh.area_minus - expected).abs() < 1e-4 * expected,
            "minus area {} vs {expected}",
            mesh.area_minus
        );
    }

    #[test]
    fn sawtooth_mesh_hits_kinks_exactly() {
        let domain = unit_domain(Rational::new(1, 2), Rational::ONE, Rational::ZERO);
        let mesh = build_rough_mesh(&domain, &InterfaceProfile::sawtooth(), 8, 4).unwrap();
        // eps^1 * g: heights in [0.25, 0.75], peak hit exactly at phase 1/4
        let peak = mesh
            .pairs
            .iter()
            .map(|p| mesh.nodes[p.plus][1])
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(peak, 0.75);
        // misaligned nx_per_period is rejected
        assert!(build_rough_mesh(&domain, &InterfaceProfile::sawtooth(), 9, 4).is_err());
    }

    #[test]
    fn interface_exit_is_geometry_error() {
        // eps^k max g = (1/2)^(1/2) * 1.5 > 1? no: 1.06 >= 1 -> error
        let domain = unit_domain(Rational::new(1, 2), Rational::new(1, 2), Rational::ZERO);
        let err = build_rough_mesh(&domain, &InterfaceProfile::sine(), 8, 4).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn eps_must_divide_length() {
        let domain = unit_domain(Rational::new(1, 3), Rational::ONE, Rational::ZERO);
        build_rough_mesh(&domain, &InterfaceProfile::sine(), 8, 4).unwrap();
        let bad = unit_domain(Rational::new(2, 7), Rational::ONE, Rational::ZERO);
        assert!(build_rough_mesh(&bad, &InterfaceProfile::sine(), 8, 4).is_err());
    }

    #[test]
    fn flat_mesh_counts_and_symmetry() {
        let domain = unit_domain(Rational::ONE, Rational::ONE, Rational::ZERO);
        let mesh = build_flat_mesh(&domain, 2, 2).unwrap();
        assert_eq!(mesh.triangles.len(), 16); // 8 per component
        assert_eq!(mesh.pairs.len(), 3);
        assert!((mesh.area_plus - 1.0).abs() < 1e-14);
        assert!((mesh.area_minus - 1.0).abs() < 1e-14);
        // refinement halves the max edge length
        let fine = build_flat_mesh(&domain, 4, 4).unwrap();
        assert!((fine.max_edge_length() - 0.5 * mesh.max_edge_length()).abs() < 1e-13);
    }

    #[test]
    fn rough_area_converges_to_flat_area() {
        // area(Q_eps^+) -> area(Q^+) as eps^k -> 0 over a decreasing eps list
        let profile = InterfaceProfile::sine();
        let flat_area = 1.0;
        let mut last = f64::INFINITY;
        for den in [2_i64, 4, 8, 16] {
            let domain = unit_domain(Rational::new(1, den), Rational::from_int(2), Rational::ZERO);
            let mesh = build_rough_mesh(&domain, &profile, 8, 4).unwrap();
            let gap = (mesh.area_plus - flat_area).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn single_mesh_is_continuous() {
        let domain = unit_domain(Rational::ONE, Rational::ONE, Rational::ZERO);
        let mesh = build_single_mesh(&domain, 4, 4).unwrap();
        assert!(mesh.pairs.is_empty());
        assert_eq!(mesh.node_count(), 5 * 9);
        assert!((mesh.area_plus - 1.0).abs() < 1e-14);
        assert!((mesh.area_minus - 1.0).abs() < 1e-14);
        // the midline row exists exactly once
        let zeros = mesh.nodes.iter().filter(|n| n[1] == 0.0).count();
        assert_eq!(zeros, 5);
    }

    #[test]
    fn all_triangles_positively_oriented() {
        let domain = unit_domain(Rational::new(1, 4), Rational::ONE, Rational::ZERO);
        let mesh = build_rough_mesh(&domain, &InterfaceProfile::sawtooth(), 8, 4).unwrap();
        for t in &mesh.triangles {
            assert!(mesh.triangle_area(t) > 0.0);
        }
        // no triangle crosses the interface: plus triangles stay above the
        // lowest interface height, minus ones below the highest
        let hmin = mesh.pairs.iter().map(|p| mesh.nodes[p.plus][1]).fold(f64::INFINITY, f64::min);
        let hmax = mesh
            .pairs
            .iter()
            .map(|p| mesh.nodes[p.plus][1])
            .fold(f64::NEG_INFINITY, f64::max);
        for t in &mesh.triangles {
            let lowest = t.nodes.iter().map(|&n| mesh.nodes[n][1]).fold(f64::INFINITY, f64::min);
            let highest = t
                .nodes
                .iter()
                .map(|&n| mesh.nodes[n][1])
                .fold(f64::NEG_INFINITY, f64::max);
            match t.tag {
                Component::Plus => assert!(lowest >= hmin - 1e-12),
                Component::Minus => assert!(highest <= hmax + 1e-12),
            }
        }
    }
}
