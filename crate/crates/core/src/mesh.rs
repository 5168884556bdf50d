//! Structured quadrilateral grids, level-set interfaces and cut-element
//! quadrature.

use crate::{Error, Result, Vec2};

/// Nodes whose level set is closer than this fraction of `h` to zero are
/// pushed to the positive side.
pub const SNAP_TOLERANCE: f64 = 1e-8;

/// Subcell triangles smaller than this fraction of `h²` are dropped.
pub const DEGENERATE_AREA: f64 = 1e-14;

/// Uniform grid of square, counter-clockwise Q4 elements.
///
/// Nodes are numbered lexicographically with `x` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Vec2>,
    elements: Vec<[usize; 4]>,
    nx: usize,
    ny: usize,
    h: f64,
    origin: Vec2,
}

/// One of the four sides of a rectangular domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Bottom,
    Right,
    Top,
    Left,
}

impl Mesh {
    /// Grid over `[0, lx] × [0, ly]`.
    pub fn structured(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Mesh> {
        Mesh::structured_with_origin(nx, ny, lx, ly, Vec2::zeros())
    }

    /// Grid over `origin + [0, lx] × [0, ly]`.
    pub fn structured_with_origin(
        nx: usize,
        ny: usize,
        lx: f64,
        ly: f64,
        origin: Vec2,
    ) -> Result<Mesh> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidConfig(format!(
                "element counts must be positive, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "domain extents must be positive, got {lx} x {ly}"
            )));
        }
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        if ((hx - hy) / hx).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "elements must be square: {hx} != {hy}"
            )));
        }

        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push(origin + Vec2::new(i as f64 * hx, j as f64 * hx));
            }
        }
        let mut elements = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let n0 = j * (nx + 1) + i;
                elements.push([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1]);
            }
        }
        Ok(Mesh {
            nodes,
            elements,
            nx,
            ny,
            h: hx,
            origin,
        })
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Vec2 {
        self.nodes[i]
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }

    pub fn element_coords(&self, e: usize) -> [Vec2; 4] {
        self.elements[e].map(|n| self.nodes[n])
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Element edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn extents(&self) -> (f64, f64) {
        (self.nx as f64 * self.h, self.ny as f64 * self.h)
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Node closest to `x`.
    pub fn nearest_node(&self, x: Vec2) -> usize {
        let rel = (x - self.origin) / self.h;
        let i = rel.x.round().clamp(0.0, self.nx as f64) as usize;
        let j = rel.y.round().clamp(0.0, self.ny as f64) as usize;
        self.node_index(i, j)
    }

    /// Nodes on a domain side, ordered along the side.
    pub fn boundary_nodes(&self, side: Boundary) -> Vec<usize> {
        match side {
            Boundary::Bottom => (0..=self.nx).map(|i| self.node_index(i, 0)).collect(),
            Boundary::Top => (0..=self.nx).map(|i| self.node_index(i, self.ny)).collect(),
            Boundary::Left => (0..=self.ny).map(|j| self.node_index(0, j)).collect(),
            Boundary::Right => (0..=self.ny).map(|j| self.node_index(self.nx, j)).collect(),
        }
    }

    /// Edges `[a, b]` on a domain side, ordered along the side.
    pub fn boundary_edges(&self, side: Boundary) -> Vec<[usize; 2]> {
        self.boundary_nodes(side)
            .windows(2)
            .map(|w| [w[0], w[1]])
            .collect()
    }
}

/// A single straight or circular interface described by its signed
/// distance function. `φ > 0` is the positive side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfaceGeometry {
    /// Infinite line through `point` along the unit vector `direction`.
    /// The positive side lies to the left of `direction`.
    Line { point: Vec2, direction: Vec2 },
    /// Circle; the exterior is the positive side.
    Circle { center: Vec2, radius: f64 },
}

impl InterfaceGeometry {
    pub fn line(point: Vec2, direction: Vec2) -> Result<Self> {
        let g = InterfaceGeometry::Line {
            point,
            direction: direction.normalize(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn horizontal(y: f64) -> Self {
        InterfaceGeometry::Line {
            point: Vec2::new(0.0, y),
            direction: Vec2::new(1.0, 0.0),
        }
    }

    pub fn circle(center: Vec2, radius: f64) -> Result<Self> {
        let g = InterfaceGeometry::Circle { center, radius };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InterfaceGeometry::Line { direction, .. } => {
                if !((direction.norm() - 1.0).abs() < 1e-12) {
                    return Err(Error::InvalidConfig(
                        "line direction must be a unit vector".into(),
                    ));
                }
            }
            InterfaceGeometry::Circle { radius, .. } => {
                if !(radius > 0.0) {
                    return Err(Error::InvalidConfig("circle radius must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Signed distance to the interface.
    pub fn level_set(&self, x: Vec2) -> f64 {
        match *self {
            InterfaceGeometry::Line { point, direction } => {
                (x - point).dot(&left_normal(direction))
            }
            InterfaceGeometry::Circle { center, radius } => (x - center).norm() - radius,
        }
    }

    /// Gradient of the level set, i.e. the unit normal pointing to the
    /// positive side.
    pub fn normal(&self, x: Vec2) -> Vec2 {
        match *self {
            InterfaceGeometry::Line { direction, .. } => left_normal(direction),
            InterfaceGeometry::Circle { center, .. } => {
                let r = x - center;
                let len = r.norm();
                if len > 0.0 {
                    r / len
                } else {
                    Vec2::new(1.0, 0.0)
                }
            }
        }
    }

    /// Parameter `t ∈ [0, 1]` where the segment `a + t (b - a)` crosses the
    /// interface, given that the endpoints lie on opposite sides.
    pub fn edge_crossing(&self, a: Vec2, b: Vec2) -> f64 {
        let t = match *self {
            InterfaceGeometry::Line { .. } => {
                let fa = self.level_set(a);
                let fb = self.level_set(b);
                if fa == fb {
                    0.5
                } else {
                    fa / (fa - fb)
                }
            }
            InterfaceGeometry::Circle { center, radius } => {
                // |a - c + t d|² = r²
                let d = b - a;
                let f = a - center;
                let qa = d.dot(&d);
                let qb = 2.0 * f.dot(&d);
                let qc = f.dot(&f) - radius * radius;
                let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
                let t1 = (-qb - disc) / (2.0 * qa);
                let t2 = (-qb + disc) / (2.0 * qa);
                // pick the root closest to the unit interval
                let dist = |t: f64| (t - t.clamp(0.0, 1.0)).abs();
                if dist(t1) <= dist(t2) {
                    t1
                } else {
                    t2
                }
            }
        };
        t.clamp(0.0, 1.0)
    }
}

fn left_normal(direction: Vec2) -> Vec2 {
    Vec2::new(-direction.y, direction.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    /// Heaviside value: 1 on the positive side, 0 on the negative side.
    pub fn heaviside(self) -> f64 {
        match self {
            Side::Positive => 1.0,
            Side::Negative => 0.0,
        }
    }

    fn of(phi: f64) -> Side {
        if phi > 0.0 {
            Side::Positive
        } else {
            Side::Negative
        }
    }
}

pub type Triangle = [Vec2; 3];

/// Geometry of an element crossed by the interface.
#[derive(Debug, Clone, PartialEq)]
pub struct CutElement {
    /// Interface chord, ordered so that the positive side lies to its left.
    pub segment: [Vec2; 2],
    /// Unit normal of the chord, pointing to the positive side.
    pub normal: Vec2,
    pub positive: Vec<Triangle>,
    pub negative: Vec<Triangle>,
}

impl CutElement {
    pub fn segment_length(&self) -> f64 {
        (self.segment[1] - self.segment[0]).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementCut {
    Uncut(Side),
    Cut(CutElement),
}

/// Per-element cut geometry and per-node Heaviside values.
#[derive(Debug, Clone, PartialEq)]
pub struct CutClassification {
    elements: Vec<ElementCut>,
    /// Level set at the nodes after snapping.
    node_phi: Vec<f64>,
    node_side: Vec<Side>,
}

impl CutClassification {
    pub fn element(&self, e: usize) -> &ElementCut {
        &self.elements[e]
    }

    pub fn elements(&self) -> &[ElementCut] {
        &self.elements
    }

    pub fn cut_elements(&self) -> impl Iterator<Item = (usize, &CutElement)> {
        self.elements.iter().enumerate().filter_map(|(e, c)| match c {
            ElementCut::Cut(cut) => Some((e, cut)),
            ElementCut::Uncut(_) => None,
        })
    }

    pub fn n_cut(&self) -> usize {
        self.cut_elements().count()
    }

    pub fn node_phi(&self, n: usize) -> f64 {
        self.node_phi[n]
    }

    pub fn node_side(&self, n: usize) -> Side {
        self.node_side[n]
    }

    /// H(x_I) ∈ {0, 1}.
    pub fn node_heaviside(&self, n: usize) -> f64 {
        self.node_side[n].heaviside()
    }
}

/// Classifies every element against the interface.
///
/// Nodal level-set values within `SNAP_TOLERANCE·h` of zero are moved to
/// `+SNAP_TOLERANCE·h`. Chord endpoints are located on the exact geometry.
/// An element whose nodes change sign but where one side has negligible
/// area (interface through a corner only) is reported uncut on the other
/// side.
pub fn classify_elements(mesh: &Mesh, geometry: &InterfaceGeometry) -> Result<CutClassification> {
    geometry.validate()?;
    let h = mesh.h();
    let snap = SNAP_TOLERANCE * h;
    let node_phi: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|&x| {
            let phi = geometry.level_set(x);
            if phi.abs() < snap {
                snap
            } else {
                phi
            }
        })
        .collect();
    let node_side: Vec<Side> = node_phi.iter().map(|&p| Side::of(p)).collect();

    let min_area = DEGENERATE_AREA * h * h;
    let mut elements = Vec::with_capacity(mesh.n_elements());
    for (e, conn) in mesh.elements().iter().enumerate() {
        let sides = conn.map(|n| node_side[n]);
        if sides.iter().all(|&s| s == sides[0]) {
            elements.push(ElementCut::Uncut(sides[0]));
            continue;
        }
        let coords = mesh.element_coords(e);
        let cut = cut_element(e, &coords, &sides, geometry)?;
        let pos_area: f64 = cut.positive.iter().map(triangle_area).sum();
        let neg_area: f64 = cut.negative.iter().map(triangle_area).sum();
        if pos_area < min_area {
            elements.push(ElementCut::Uncut(Side::Negative));
        } else if neg_area < min_area {
            elements.push(ElementCut::Uncut(Side::Positive));
        } else {
            elements.push(ElementCut::Cut(cut));
        }
    }

    Ok(CutClassification {
        elements,
        node_phi,
        node_side,
    })
}

fn cut_element(
    e: usize,
    coords: &[Vec2; 4],
    sides: &[Side; 4],
    geometry: &InterfaceGeometry,
) -> Result<CutElement> {
    let mut positive = Vec::with_capacity(6);
    let mut negative = Vec::with_capacity(6);
    let mut crossings = Vec::with_capacity(2);
    for k in 0..4 {
        let a = coords[k];
        let b = coords[(k + 1) % 4];
        match sides[k] {
            Side::Positive => positive.push(a),
            Side::Negative => negative.push(a),
        }
        if sides[k] != sides[(k + 1) % 4] {
            let t = geometry.edge_crossing(a, b);
            let x = a + (b - a) * t;
            positive.push(x);
            negative.push(x);
            crossings.push((x, sides[k]));
        }
    }
    if crossings.len() != 2 {
        return Err(Error::UnsupportedTopology {
            element: e,
            reason: format!("interface crosses {} element edges", crossings.len()),
        });
    }

    // The positive polygon is counter-clockwise and contains the chord as an
    // edge, so it lies to the left of the chord taken in polygon order.
    let (x0, side0) = crossings[0];
    let (x1, _) = crossings[1];
    let segment = if side0 == Side::Positive { [x0, x1] } else { [x1, x0] };
    let tangent = segment[1] - segment[0];
    let len = tangent.norm();
    let normal = if len > 0.0 {
        Vec2::new(-tangent.y, tangent.x) / len
    } else {
        geometry.normal(x0)
    };

    Ok(CutElement {
        segment,
        normal,
        positive: fan_triangulate(&positive),
        negative: fan_triangulate(&negative),
    })
}

/// Splits a convex polygon into triangles around its vertex centroid.
fn fan_triangulate(poly: &[Vec2]) -> Vec<Triangle> {
    if poly.len() < 3 {
        return Vec::new();
    }
    let c = poly.iter().fold(Vec2::zeros(), |acc, p| acc + p) / poly.len() as f64;
    (0..poly.len())
        .map(|k| [c, poly[k], poly[(k + 1) % poly.len()]])
        .collect()
}

pub fn triangle_area(t: &Triangle) -> f64 {
    let a = t[1] - t[0];
    let b = t[2] - t[0];
    0.5 * (a.x * b.y - a.y * b.x).abs()
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum();
    0.5 * twice.abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumePoint {
    pub x: Vec2,
    pub weight: f64,
    pub side: Side,
}

const GAUSS2: f64 = 0.577_350_269_189_625_8;

/// Volume quadrature for one element: 2×2 Gauss on uncut elements, a
/// three-point rule on every subcell triangle of cut elements.
pub fn subcell_volume_quadrature(
    mesh: &Mesh,
    classification: &CutClassification,
    e: usize,
) -> Vec<VolumePoint> {
    let h = mesh.h();
    let min_area = DEGENERATE_AREA * h * h;
    match classification.element(e) {
        ElementCut::Uncut(side) => {
            let c = mesh.element_coords(e);
            let center = (c[0] + c[2]) * 0.5;
            let half = 0.5 * h;
            let w = h * h / 4.0;
            [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
                .iter()
                .map(|&(sx, sy)| VolumePoint {
                    x: center + Vec2::new(sx * GAUSS2 * half, sy * GAUSS2 * half),
                    weight: w,
                    side: *side,
                })
                .collect()
        }
        ElementCut::Cut(cut) => {
            let mut points = Vec::with_capacity(3 * (cut.positive.len() + cut.negative.len()));
            for (tris, side) in [(&cut.positive, Side::Positive), (&cut.negative, Side::Negative)] {
                for t in tris {
                    let area = triangle_area(t);
                    if area < min_area {
                        continue;
                    }
                    for bary in TRIANGLE_RULE {
                        points.push(VolumePoint {
                            x: t[0] * bary[0] + t[1] * bary[1] + t[2] * bary[2],
                            weight: area / 3.0,
                            side,
                        });
                    }
                }
            }
            points
        }
    }
}

/// Degree-2 rule with interior points.
const TRIANGLE_RULE: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub x: Vec2,
    /// Length of the segment represented by this point (area per unit
    /// thickness).
    pub area: f64,
}

/// Two-point Gauss rule on a straight segment. `None` for a zero-length
/// segment.
pub fn interface_segment_quadrature(a: Vec2, b: Vec2) -> Option<[SurfacePoint; 2]> {
    let len = (b - a).norm();
    if !(len > 0.0) {
        return None;
    }
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    Some([
        SurfacePoint {
            x: mid - half * GAUSS2,
            area: 0.5 * len,
        },
        SurfacePoint {
            x: mid + half * GAUSS2,
            area: 0.5 * len,
        },
    ])
}
