//! Shifted-Heaviside enrichment on bilinear quadrilaterals.
//!
//! The displacement inside an element is
//! `u(x) = Σ N_I(x) d_I + Σ [H(x) − H(x_J)] N_J(x) a_J`, so the standard
//! coefficients keep their nodal meaning and the enriched coefficients
//! interpolate the jump directly: `⟦u⟧(x) = Σ N_J(x) a_J`.

use crate::mesh::{CutClassification, ElementCut, Mesh, Side};
use crate::{Error, Result, Vec2};

/// Bilinear shape function values and spatial gradients at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeValues {
    pub n: [f64; 4],
    pub grad: [Vec2; 4],
}

const CORNERS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

fn reference_values(xi: Vec2) -> ([f64; 4], [Vec2; 4]) {
    let mut n = [0.0; 4];
    let mut dn = [Vec2::zeros(); 4];
    for (k, &(sx, sy)) in CORNERS.iter().enumerate() {
        n[k] = 0.25 * (1.0 + sx * xi.x) * (1.0 + sy * xi.y);
        dn[k] = Vec2::new(
            0.25 * sx * (1.0 + sy * xi.y),
            0.25 * sy * (1.0 + sx * xi.x),
        );
    }
    (n, dn)
}

/// Q4 shape functions at reference coordinates `xi ∈ [−1, 1]²` of the
/// element with corner coordinates `coords`. Returns the values and the
/// Jacobian determinant of the reference map.
pub fn shape_functions(coords: &[Vec2; 4], xi: Vec2) -> (ShapeValues, f64) {
    let (n, dn) = reference_values(xi);
    // J = ∂x/∂ξ
    let mut j = nalgebra::Matrix2::<f64>::zeros();
    for k in 0..4 {
        j += coords[k] * dn[k].transpose();
    }
    let det = j.determinant();
    let inv_t = j
        .try_inverse()
        .map(|inv| inv.transpose())
        .unwrap_or_else(nalgebra::Matrix2::zeros);
    let grad = dn.map(|g| inv_t * g);
    (ShapeValues { n, grad }, det)
}

/// Reference coordinates of a physical point, by Newton iteration on the
/// bilinear map (exact after one step for parallelograms).
pub fn local_coordinates(coords: &[Vec2; 4], x: Vec2) -> Vec2 {
    let mut xi = Vec2::zeros();
    for _ in 0..20 {
        let (n, dn) = reference_values(xi);
        let mut mapped = Vec2::zeros();
        let mut j = nalgebra::Matrix2::<f64>::zeros();
        for k in 0..4 {
            mapped += coords[k] * n[k];
            j += coords[k] * dn[k].transpose();
        }
        let r = x - mapped;
        let Some(inv) = j.try_inverse() else { break };
        let step = inv * r;
        xi += step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    xi
}

/// Shape functions at a physical point inside element `e`.
pub fn shape_at(mesh: &Mesh, e: usize, x: Vec2) -> Result<ShapeValues> {
    let coords = mesh.element_coords(e);
    let xi = local_coordinates(&coords, x);
    let (s, det) = shape_functions(&coords, xi);
    if !(det > 0.0) {
        return Err(Error::SingularElement { element: e, det });
    }
    Ok(s)
}

/// Enrichment function of local node `j`: value and gradient of
/// `[H(x) − H(x_j)] N_j(x)`, with `H` piecewise constant off the interface.
pub fn enriched_shape(shape: &ShapeValues, j: usize, side: Side, node_side: Side) -> (f64, Vec2) {
    let shift = side.heaviside() - node_side.heaviside();
    (shift * shape.n[j], shape.grad[j] * shift)
}

/// Jump `Σ N_j a_j` from the enriched coefficients of the element nodes.
pub fn displacement_jump(n: &[f64; 4], a: &[Vec2; 4]) -> Vec2 {
    n.iter().zip(a).fold(Vec2::zeros(), |acc, (&nj, aj)| acc + aj * nj)
}

/// Area-weighted average of the jumps at the two surface points.
pub fn averaged_projection(u1: Vec2, u2: Vec2, area1: f64, area2: f64) -> Vec2 {
    (u1 * area1 + u2 * area2) / (area1 + area2)
}

/// Numbering of standard and enriched degrees of freedom.
///
/// Standard DOFs of node `i` are `2i, 2i+1`. Enriched nodes follow in node
/// order starting at `n_std`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    n_nodes: usize,
    enriched_slot: Vec<Option<usize>>,
    n_enriched_nodes: usize,
}

impl DofMap {
    /// Enriches every node of every cut element.
    pub fn build(mesh: &Mesh, classification: &CutClassification) -> DofMap {
        let mut flag = vec![false; mesh.n_nodes()];
        for (e, _) in classification.cut_elements() {
            for &n in &mesh.elements()[e] {
                flag[n] = true;
            }
        }
        let mut next = 0;
        let enriched_slot = flag
            .iter()
            .map(|&f| {
                f.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        DofMap {
            n_nodes: mesh.n_nodes(),
            enriched_slot,
            n_enriched_nodes: next,
        }
    }

    pub fn n_std(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn n_enr(&self) -> usize {
        2 * self.n_enriched_nodes
    }

    pub fn n_total(&self) -> usize {
        self.n_std() + self.n_enr()
    }

    pub fn n_enriched_nodes(&self) -> usize {
        self.n_enriched_nodes
    }

    pub fn is_enriched(&self, node: usize) -> bool {
        self.enriched_slot[node].is_some()
    }

    pub fn std_dof(&self, node: usize, component: usize) -> usize {
        2 * node + component
    }

    pub fn enr_dof(&self, node: usize, component: usize) -> Option<usize> {
        self.enriched_slot[node].map(|s| self.n_std() + 2 * s + component)
    }
}

/// Unknown vector `X = {d; a}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionVector {
    values: Vec<f64>,
}

impl SolutionVector {
    pub fn zeros(dofs: &DofMap) -> Self {
        SolutionVector {
            values: vec![0.0; dofs.n_total()],
        }
    }

    pub fn from_vec(dofs: &DofMap, values: Vec<f64>) -> Result<Self> {
        if values.len() != dofs.n_total() {
            return Err(Error::InvalidConfig(format!(
                "solution length {} does not match {} DOFs",
                values.len(),
                dofs.n_total()
            )));
        }
        Ok(SolutionVector { values })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn standard(&self, dofs: &DofMap, node: usize) -> Vec2 {
        Vec2::new(
            self.values[dofs.std_dof(node, 0)],
            self.values[dofs.std_dof(node, 1)],
        )
    }

    /// Enriched coefficient of a node; zero for nodes without enrichment.
    pub fn enriched(&self, dofs: &DofMap, node: usize) -> Vec2 {
        match (dofs.enr_dof(node, 0), dofs.enr_dof(node, 1)) {
            (Some(i), Some(j)) => Vec2::new(self.values[i], self.values[j]),
            _ => Vec2::zeros(),
        }
    }
}

/// Full displacement `u(x)` in element `e` evaluated on the given side of
/// the interface.
pub fn displacement_at(
    mesh: &Mesh,
    classification: &CutClassification,
    dofs: &DofMap,
    x_vec: &SolutionVector,
    e: usize,
    x: Vec2,
    side: Side,
) -> Result<Vec2> {
    let s = shape_at(mesh, e, x)?;
    let conn = mesh.elements()[e];
    let mut u = Vec2::zeros();
    for (j, &node) in conn.iter().enumerate() {
        u += x_vec.standard(dofs, node) * s.n[j];
        let (phi, _) = enriched_shape(&s, j, side, classification.node_side(node));
        u += x_vec.enriched(dofs, node) * phi;
    }
    Ok(u)
}

/// Side of the interface a volume point of element `e` belongs to when
/// only its element is known (uncut elements).
pub fn element_side(classification: &CutClassification, e: usize) -> Option<Side> {
    match classification.element(e) {
        ElementCut::Uncut(s) => Some(*s),
        ElementCut::Cut(_) => None,
    }
}
