//! Residual and Jacobian assembly.
//!
//! The bulk is linear elastic, so its stiffness is assembled once when the
//! [`Model`] is built. Each evaluation adds the interface terms on top:
//! `R = K X + F_Γ(X) − Σ_g λ_g F_g`, where `F_Γ` integrates the traction
//! against the enriched shape functions and `λ_g` scales load group `g`.

use nalgebra::{Matrix3, SMatrix};

use crate::contact::{ContactLaw, PointHistory, TractionState};
use crate::mesh::{
    classify_elements, interface_segment_quadrature, subcell_volume_quadrature, CutClassification,
    ElementCut, InterfaceGeometry, Mesh, Side, SurfacePoint,
};
use crate::xfem::{enriched_shape, shape_at, DofMap};
use crate::{Error, Result, Vec2};

/// Isotropic linear elastic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Young's modulus (Pa).
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl Material {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        let m = Material {
            youngs_modulus,
            poisson_ratio,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.youngs_modulus > 0.0
            && self.youngs_modulus.is_finite()
            && self.poisson_ratio > -1.0
            && self.poisson_ratio < 0.5
        {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "material needs E > 0 and -1 < nu < 0.5, got E = {}, nu = {}",
                self.youngs_modulus, self.poisson_ratio
            )))
        }
    }
}

/// Plane-strain elasticity matrix in Voigt order `(xx, yy, xy)` with
/// engineering shear strain.
pub fn plane_strain_stiffness(material: &Material) -> Result<Matrix3<f64>> {
    material.validate()?;
    let e = material.youngs_modulus;
    let nu = material.poisson_ratio;
    let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Ok(Matrix3::new(
        c * (1.0 - nu),
        c * nu,
        0.0,
        c * nu,
        c * (1.0 - nu),
        0.0,
        0.0,
        0.0,
        c * (1.0 - 2.0 * nu) / 2.0,
    ))
}

/// Material of each side of the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Materials {
    pub positive: Material,
    pub negative: Material,
}

impl Materials {
    pub fn uniform(material: Material) -> Self {
        Materials {
            positive: material,
            negative: material,
        }
    }

    pub fn get(&self, side: Side) -> &Material {
        match side {
            Side::Positive => &self.positive,
            Side::Negative => &self.negative,
        }
    }
}

/// Surface integration scheme for the interface terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integration {
    /// Traction evaluated at each of the two Gauss points of a segment.
    Standard,
    /// Jump projected to its area-weighted mean over the segment before the
    /// traction is evaluated; test functions are projected the same way.
    Averaged,
}

/// Prescribed displacement component, scaled by its load group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dirichlet {
    pub node: usize,
    pub component: usize,
    pub value: f64,
    pub group: usize,
}

/// Uniform traction on a boundary edge, scaled by its load group. With
/// `side` set, only the part of the edge on that side of the interface is
/// loaded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeTraction {
    pub edge: [usize; 2],
    pub traction: Vec2,
    pub group: usize,
    pub side: Option<Side>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryConditions {
    pub dirichlet: Vec<Dirichlet>,
    pub tractions: Vec<EdgeTraction>,
}

impl BoundaryConditions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fix(&mut self, node: usize, component: usize, value: f64, group: usize) -> &mut Self {
        self.dirichlet.push(Dirichlet {
            node,
            component,
            value,
            group,
        });
        self
    }

    pub fn fix_nodes(&mut self, nodes: &[usize], component: usize, value: f64, group: usize) -> &mut Self {
        for &n in nodes {
            self.fix(n, component, value, group);
        }
        self
    }

    pub fn load_edges(
        &mut self,
        edges: &[[usize; 2]],
        traction: Vec2,
        group: usize,
        side: Option<Side>,
    ) -> &mut Self {
        self.tractions.extend(edges.iter().map(|&edge| EdgeTraction {
            edge,
            traction,
            group,
            side,
        }));
        self
    }

    /// Number of load groups referenced.
    pub fn n_groups(&self) -> usize {
        let d = self.dirichlet.iter().map(|d| d.group + 1);
        let t = self.tractions.iter().map(|t| t.group + 1);
        d.chain(t).max().unwrap_or(0)
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for d in &self.dirichlet {
            if d.node >= mesh.n_nodes() || d.component > 1 {
                return Err(Error::InvalidConfig(format!(
                    "constraint on nonexistent DOF: node {}, component {}",
                    d.node, d.component
                )));
            }
            if !d.value.is_finite() {
                return Err(Error::InvalidConfig(format!("non-finite prescribed value at node {}", d.node)));
            }
            if !seen.insert((d.node, d.component)) {
                return Err(Error::InvalidConfig(format!(
                    "node {} component {} is constrained twice",
                    d.node, d.component
                )));
            }
        }
        for t in &self.tractions {
            if element_with_edge(mesh, t.edge[0], t.edge[1]).is_none() {
                return Err(Error::InvalidConfig(format!("{:?} is not a mesh edge", t.edge)));
            }
        }
        Ok(())
    }
}

fn element_with_edge(mesh: &Mesh, a: usize, b: usize) -> Option<usize> {
    if a >= mesh.n_nodes() || b >= mesh.n_nodes() || a == b {
        return None;
    }
    let stride = mesh.nx() + 1;
    let (i, j) = (a % stride, a / stride);
    for ej in j.saturating_sub(1)..=j.min(mesh.ny() - 1) {
        for ei in i.saturating_sub(1)..=i.min(mesh.nx() - 1) {
            let e = ej * mesh.nx() + ei;
            let conn = mesh.elements()[e];
            let k = conn.iter().position(|&n| n == a)?;
            if conn[(k + 1) % 4] == b || conn[(k + 3) % 4] == b {
                return Some(e);
            }
        }
    }
    None
}

/// Side of a point inside element `e`, consistent with the subcells.
fn side_of_point(cls: &CutClassification, e: usize, x: Vec2) -> Side {
    match cls.element(e) {
        ElementCut::Uncut(s) => *s,
        ElementCut::Cut(c) => {
            if (x - c.segment[0]).dot(&c.normal) >= 0.0 {
                Side::Positive
            } else {
                Side::Negative
            }
        }
    }
}

/// Compressed-column sparsity pattern with sorted row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CscPattern {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
}

impl CscPattern {
    fn from_columns(columns: Vec<Vec<usize>>) -> Self {
        let n = columns.len();
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for mut rows in columns {
            rows.sort_unstable();
            rows.dedup();
            row_idx.extend(rows);
            col_ptr.push(row_idx.len());
        }
        CscPattern { n, col_ptr, row_idx }
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Storage position of entry `(row, col)`.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let start = self.col_ptr[col];
        let rows = &self.row_idx[start..self.col_ptr[col + 1]];
        rows.binary_search(&row).ok().map(|k| start + k)
    }

    /// `y += A x`.
    pub fn mul_add(&self, values: &[f64], x: &[f64], y: &mut [f64]) {
        for col in 0..self.n {
            let xc = x[col];
            if xc == 0.0 {
                continue;
            }
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                y[self.row_idx[k]] += values[k] * xc;
            }
        }
    }

    pub fn to_dense(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for col in 0..self.n {
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                a[self.row_idx[k]][col] = values[k];
            }
        }
        a
    }
}

/// Interface segment of one cut element with everything needed to
/// integrate over it.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCell {
    pub element: usize,
    pub normal: Vec2,
    pub points: [SurfacePoint; 2],
    /// Shape function values of the element nodes at each point.
    pub shape: [[f64; 4]; 2],
    /// Enriched DOFs `(x, y)` of the four element nodes.
    dofs: [usize; 8],
    /// Pattern positions of the 8×8 enriched block, row-major.
    positions: [usize; 64],
}

impl SurfaceCell {
    /// Total segment length.
    pub fn length(&self) -> f64 {
        self.points[0].area + self.points[1].area
    }

    /// Enriched coefficients of the element nodes.
    pub fn coefficients(&self, x: &[f64]) -> [Vec2; 4] {
        std::array::from_fn(|j| Vec2::new(x[self.dofs[2 * j]], x[self.dofs[2 * j + 1]]))
    }

    /// Weights `N_j` used for the jump at point `q` under `scheme`.
    pub fn weights(&self, q: usize, scheme: Integration) -> [f64; 4] {
        match scheme {
            Integration::Standard => self.shape[q],
            Integration::Averaged => {
                let [a1, a2] = [self.points[0].area, self.points[1].area];
                std::array::from_fn(|j| (a1 * self.shape[0][j] + a2 * self.shape[1][j]) / (a1 + a2))
            }
        }
    }

    pub fn jump(&self, x: &[f64], q: usize, scheme: Integration) -> Vec2 {
        let w = self.weights(q, scheme);
        let a = self.coefficients(x);
        (0..4).fold(Vec2::zeros(), |acc, j| acc + a[j] * w[j])
    }
}

/// Specification of a problem before discretization-dependent data is
/// computed.
#[derive(Debug, Clone)]
pub struct ModelSetup {
    pub mesh: Mesh,
    pub geometry: InterfaceGeometry,
    pub materials: Materials,
    pub law: ContactLaw,
    pub integration: Integration,
    pub bcs: BoundaryConditions,
}

/// Discretized problem: classification, DOFs, sparsity pattern, constant
/// bulk stiffness and external load vectors.
#[derive(Debug, Clone)]
pub struct Model {
    pub mesh: Mesh,
    pub geometry: InterfaceGeometry,
    pub classification: CutClassification,
    pub dofs: DofMap,
    pub materials: Materials,
    pub law: ContactLaw,
    pub integration: Integration,
    pub bcs: BoundaryConditions,
    pattern: CscPattern,
    bulk: Vec<f64>,
    surface: Vec<SurfaceCell>,
    external: Vec<Vec<f64>>,
}

/// Output of one evaluation of the discrete equations.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Jacobian values in the order of [`Model::pattern`].
    pub jacobian: Vec<f64>,
    pub residual: Vec<f64>,
    /// Traction state at every surface point (two per cell).
    pub states: Vec<TractionState>,
    /// Plastic slip to commit at every surface point.
    pub plastic_slip: Vec<Vec2>,
}

fn element_dofs(mesh: &Mesh, dofs: &DofMap, e: usize) -> Vec<usize> {
    let conn = mesh.elements()[e];
    let mut list = Vec::with_capacity(16);
    for &n in &conn {
        list.push(dofs.std_dof(n, 0));
        list.push(dofs.std_dof(n, 1));
    }
    for &n in &conn {
        if let (Some(x), Some(y)) = (dofs.enr_dof(n, 0), dofs.enr_dof(n, 1)) {
            list.push(x);
            list.push(y);
        }
    }
    list
}

type BMatrix = SMatrix<f64, 3, 16>;

/// Strain-displacement matrix at a point on `side` of element `e`. Columns
/// follow [`element_dofs`].
fn strain_matrix(mesh: &Mesh, cls: &CutClassification, dofs: &DofMap, e: usize, x: Vec2, side: Side) -> Result<BMatrix> {
    let conn = mesh.elements()[e];
    let shape = shape_at(mesh, e, x)?;
    let mut b = BMatrix::zeros();
    let mut put = |col: usize, g: Vec2| {
        b[(0, col)] = g.x;
        b[(1, col + 1)] = g.y;
        b[(2, col)] = g.y;
        b[(2, col + 1)] = g.x;
    };
    for (j, g) in shape.grad.iter().enumerate() {
        put(2 * j, *g);
    }
    let mut col = 8;
    for (j, &n) in conn.iter().enumerate() {
        if dofs.is_enriched(n) {
            let (_, g) = enriched_shape(&shape, j, side, cls.node_side(n));
            put(col, g);
            col += 2;
        }
    }
    Ok(b)
}

impl Model {
    pub fn new(setup: ModelSetup) -> Result<Model> {
        let ModelSetup {
            mesh,
            geometry,
            materials,
            law,
            integration,
            bcs,
        } = setup;
        materials.positive.validate()?;
        materials.negative.validate()?;
        law.validate()?;
        bcs.validate(&mesh)?;
        let classification = classify_elements(&mesh, &geometry)?;
        let dofs = DofMap::build(&mesh, &classification);
        let n = dofs.n_total();

        let all_dofs: Vec<Vec<usize>> = (0..mesh.n_elements()).map(|e| element_dofs(&mesh, &dofs, e)).collect();
        let mut columns = vec![Vec::new(); n];
        for list in &all_dofs {
            for &c in list {
                columns[c].extend_from_slice(list);
            }
        }
        let pattern = CscPattern::from_columns(columns);

        let d_pos = plane_strain_stiffness(&materials.positive)?;
        let d_neg = plane_strain_stiffness(&materials.negative)?;
        let mut bulk = vec![0.0; pattern.nnz()];
        for (e, list) in all_dofs.iter().enumerate() {
            let m = list.len();
            let mut ke = SMatrix::<f64, 16, 16>::zeros();
            for vp in subcell_volume_quadrature(&mesh, &classification, e) {
                let b = strain_matrix(&mesh, &classification, &dofs, e, vp.x, vp.side)?;
                let d = if vp.side == Side::Positive { &d_pos } else { &d_neg };
                ke += b.transpose() * d * b * vp.weight;
            }
            for (c, &gc) in list.iter().enumerate() {
                for (r, &gr) in list.iter().enumerate().take(m) {
                    let v = ke[(r, c)];
                    if v != 0.0 {
                        bulk[pattern.position(gr, gc).expect("bulk entry in pattern")] += v;
                    }
                }
            }
        }

        let mut surface = Vec::with_capacity(classification.n_cut());
        for (e, cut) in classification.cut_elements() {
            let Some(points) = interface_segment_quadrature(cut.segment[0], cut.segment[1]) else {
                continue;
            };
            let shape = [shape_at(&mesh, e, points[0].x)?.n, shape_at(&mesh, e, points[1].x)?.n];
            let conn = mesh.elements()[e];
            let mut cell_dofs = [0; 8];
            for (j, &node) in conn.iter().enumerate() {
                for c in 0..2 {
                    cell_dofs[2 * j + c] = dofs.enr_dof(node, c).expect("nodes of cut elements are enriched");
                }
            }
            let positions =
                std::array::from_fn(|k| pattern.position(cell_dofs[k / 8], cell_dofs[k % 8]).expect("enriched block in pattern"));
            surface.push(SurfaceCell {
                element: e,
                normal: cut.normal,
                points,
                shape,
                dofs: cell_dofs,
                positions,
            });
        }

        let mut model = Model {
            mesh,
            geometry,
            classification,
            dofs,
            materials,
            law,
            integration,
            bcs,
            pattern,
            bulk,
            surface,
            external: Vec::new(),
        };
        model.external = model.external_loads()?;
        Ok(model)
    }

    fn external_loads(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.dofs.n_total();
        let mut loads = vec![vec![0.0; n]; self.bcs.n_groups()];
        for t in &self.bcs.tractions {
            let [a, b] = t.edge;
            let e = element_with_edge(&self.mesh, a, b).expect("validated edge");
            let (xa, xb) = (self.mesh.node(a), self.mesh.node(b));
            let (sa, sb) = (self.classification.node_side(a), self.classification.node_side(b));
            let mut pieces = Vec::with_capacity(2);
            if sa != sb && matches!(self.classification.element(e), ElementCut::Cut(_)) {
                let xm = xa + (xb - xa) * self.geometry.edge_crossing(xa, xb);
                pieces.push((xa, xm));
                pieces.push((xm, xb));
            } else {
                pieces.push((xa, xb));
            }
            let list = element_dofs(&self.mesh, &self.dofs, e);
            for (p, q) in pieces {
                let Some(gauss) = interface_segment_quadrature(p, q) else { continue };
                for sp in gauss {
                    let side = side_of_point(&self.classification, e, sp.x);
                    if t.side.is_some_and(|s| s != side) {
                        continue;
                    }
                    let values = self.shape_row(e, sp.x, side)?;
                    for (k, &g) in list.iter().enumerate() {
                        loads[t.group][g] += values[k / 2] * t.traction[k % 2] * sp.area;
                    }
                }
            }
        }
        Ok(loads)
    }

    /// Shape function values ordered like [`element_dofs`] (one per node
    /// block: four standard, then one per enriched node).
    fn shape_row(&self, e: usize, x: Vec2, side: Side) -> Result<Vec<f64>> {
        let shape = shape_at(&self.mesh, e, x)?;
        let mut row = shape.n.to_vec();
        for (j, &n) in self.mesh.elements()[e].iter().enumerate() {
            if self.dofs.is_enriched(n) {
                row.push(enriched_shape(&shape, j, side, self.classification.node_side(n)).0);
            }
        }
        Ok(row)
    }

    pub fn pattern(&self) -> &CscPattern {
        &self.pattern
    }

    /// Constant bulk stiffness values in pattern order.
    pub fn bulk_stiffness(&self) -> &[f64] {
        &self.bulk
    }

    pub fn surface(&self) -> &[SurfaceCell] {
        &self.surface
    }

    pub fn n_surface_points(&self) -> usize {
        2 * self.surface.len()
    }

    pub fn n_groups(&self) -> usize {
        self.external.len()
    }

    /// External force vector of load group `g` at unit scaling.
    pub fn external_load(&self, g: usize) -> &[f64] {
        &self.external[g]
    }

    pub fn total_external(&self, loads: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.dofs.n_total()];
        for (g, ext) in self.external.iter().enumerate() {
            let s = loads.get(g).copied().unwrap_or(0.0);
            if s != 0.0 {
                f.iter_mut().zip(ext).for_each(|(fi, e)| *fi += s * e);
            }
        }
        f
    }

    /// Prescribed value of every constrained DOF at load scaling `loads`.
    pub fn prescribed(&self, loads: &[f64]) -> Vec<(usize, f64)> {
        self.bcs
            .dirichlet
            .iter()
            .map(|d| {
                let s = loads.get(d.group).copied().unwrap_or(0.0);
                (self.dofs.std_dof(d.node, d.component), s * d.value)
            })
            .collect()
    }

    /// Evaluates residual, Jacobian and interface states at `x`.
    ///
    /// `history` holds the committed state of every surface point.
    pub fn evaluate(&self, x: &[f64], history: &[PointHistory], loads: &[f64]) -> Result<Evaluation> {
        let n = self.dofs.n_total();
        if x.len() != n || history.len() != self.n_surface_points() {
            return Err(Error::InvalidConfig(format!(
                "state sizes {} / {} do not match model sizes {} / {}",
                x.len(),
                history.len(),
                n,
                self.n_surface_points()
            )));
        }
        let mut residual = self.total_external(loads);
        residual.iter_mut().for_each(|r| *r = -*r);
        self.pattern.mul_add(&self.bulk, x, &mut residual);
        let mut jacobian = self.bulk.clone();
        let mut states = Vec::with_capacity(self.n_surface_points());
        let mut plastic_slip = Vec::with_capacity(self.n_surface_points());

        for (k, cell) in self.surface.iter().enumerate() {
            let mut first: Option<(TractionState, Vec2)> = None;
            for q in 0..2 {
                // both points of an averaged cell see the same jump
                let (state, slip) = match first {
                    Some(v) if self.integration == Integration::Averaged => v,
                    _ => {
                        let jump = cell.jump(x, q, self.integration);
                        self.law.evaluate(jump, cell.normal, &history[2 * k + q])?
                    }
                };
                first.get_or_insert((state, slip));
                states.push(state);
                plastic_slip.push(slip);

                let w = cell.weights(q, self.integration);
                let area = cell.points[q].area;
                for i in 0..4 {
                    for c in 0..2 {
                        residual[cell.dofs[2 * i + c]] += area * w[i] * state.traction[c];
                    }
                }
                for i in 0..4 {
                    for j in 0..4 {
                        let f = area * w[i] * w[j];
                        for c in 0..2 {
                            for d in 0..2 {
                                jacobian[cell.positions[(2 * i + c) * 8 + 2 * j + d]] += f * state.tangent[(c, d)];
                            }
                        }
                    }
                }
            }
        }
        Ok(Evaluation {
            jacobian,
            residual,
            states,
            plastic_slip,
        })
    }

    /// Initial interface history: zero jump and zero plastic slip.
    pub fn initial_history(&self) -> Vec<PointHistory> {
        vec![PointHistory::default(); self.n_surface_points()]
    }

    /// Displacement at a physical point inside element `e`.
    pub fn displacement(&self, x: &[f64], e: usize, point: Vec2) -> Result<Vec2> {
        let side = side_of_point(&self.classification, e, point);
        let row = self.shape_row(e, point, side)?;
        let list = element_dofs(&self.mesh, &self.dofs, e);
        Ok((0..list.len()).fold(Vec2::zeros(), |acc, k| {
            let mut u = acc;
            u[k % 2] += row[k / 2] * x[list[k]];
            u
        }))
    }

    /// Stress (Voigt) at a point inside element `e`.
    pub fn stress(&self, x: &[f64], e: usize, point: Vec2) -> Result<nalgebra::Vector3<f64>> {
        let side = side_of_point(&self.classification, e, point);
        let b = strain_matrix(&self.mesh, &self.classification, &self.dofs, e, point, side)?;
        let list = element_dofs(&self.mesh, &self.dofs, e);
        let mut u = SMatrix::<f64, 16, 1>::zeros();
        for (k, &g) in list.iter().enumerate() {
            u[k] = x[g];
        }
        let d = plane_strain_stiffness(self.materials.get(side))?;
        Ok(d * (b * u))
    }
}

/// Elimination of constrained DOFs.
///
/// Built once per model: the reduced pattern keeps only free rows and
/// columns, and `value_map` points from each reduced entry to its position
/// in the full pattern.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub free: Vec<usize>,
    /// Reduced index of every full DOF, `None` if constrained.
    pub reduced_index: Vec<Option<usize>>,
    pub pattern: CscPattern,
    value_map: Vec<usize>,
}

impl Reduction {
    pub fn new(model: &Model) -> Reduction {
        let n = model.dofs.n_total();
        let mut constrained = vec![false; n];
        for d in &model.bcs.dirichlet {
            constrained[model.dofs.std_dof(d.node, d.component)] = true;
        }
        let mut reduced_index = vec![None; n];
        let mut free = Vec::with_capacity(n);
        for (i, &c) in constrained.iter().enumerate() {
            if !c {
                reduced_index[i] = Some(free.len());
                free.push(i);
            }
        }
        let full = &model.pattern;
        let mut col_ptr = Vec::with_capacity(free.len() + 1);
        let mut row_idx = Vec::new();
        let mut value_map = Vec::new();
        col_ptr.push(0);
        for &col in &free {
            for k in full.col_ptr[col]..full.col_ptr[col + 1] {
                if let Some(r) = reduced_index[full.row_idx[k]] {
                    row_idx.push(r);
                    value_map.push(k);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Reduction {
            free,
            reduced_index,
            pattern: CscPattern {
                n: col_ptr.len() - 1,
                col_ptr,
                row_idx,
            },
            value_map,
        }
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn matrix(&self, full_values: &[f64]) -> Vec<f64> {
        self.value_map.iter().map(|&k| full_values[k]).collect()
    }

    pub fn vector(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }

    /// Reduced right-hand side `−(R_f + J_fc Δ_c)` for constrained
    /// increments `delta` (full-length, zero on free DOFs).
    pub fn rhs(&self, full_pattern: &CscPattern, full_values: &[f64], residual: &[f64], delta: &[(usize, f64)]) -> Vec<f64> {
        let mut rhs: Vec<f64> = self.free.iter().map(|&i| -residual[i]).collect();
        for &(col, dc) in delta {
            if dc == 0.0 {
                continue;
            }
            for k in full_pattern.col_ptr[col]..full_pattern.col_ptr[col + 1] {
                if let Some(r) = self.reduced_index[full_pattern.row_idx[k]] {
                    rhs[r] -= full_values[k] * dc;
                }
            }
        }
        rhs
    }
}
