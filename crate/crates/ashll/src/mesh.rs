//! Structured curvilinear meshes: generators for the cylinder meshes,
//! Cartesian boxes and O-meshes, plus face metrics and cell volumes.
//!
//! Index convention: cells are addressed (i, j) with i along the xi
//! direction (0..n_xi) and j along eta (0..n_eta). Nodes form an
//! (n_xi+1) x (n_eta+1) array. An i-face with index i separates cells
//! (i-1, j) and (i, j); its unit normal points in the +xi direction.
//! A j-face with index j separates cells (i, j-1) and (i, j); its unit
//! normal points in the +eta direction.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::scalar::Scalar;

/// Boundary condition tag attached to one of the four edges of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryTag<S> {
    Inflow,
    Outflow,
    SlipWall,
    NoSlipIsothermalWall {
        t_wall: S,
        /// Tangential wall velocity (moving-lid cases); zero for a fixed wall.
        u_wall: S,
        v_wall: S,
    },
    Farfield,
    /// Subsonic-capable far field based on the 1D Riemann invariants
    /// normal to the boundary. The plain `Farfield` switch flips between
    /// freestream and zero-gradient on the sign of a near-zero normal
    /// velocity, which pumps acoustic energy at very low Mach numbers.
    CharacteristicFarfield,
    /// Analytic pre-/post-shock split tracking the Mach-10, 60-degree
    /// moving shock of the double Mach reflection problem.
    DmrExactTop,
    /// Bottom boundary of the double Mach reflection domain: post-shock
    /// state ahead of the shock foot anchor x0 (which keeps the uniform
    /// post-shock strip an exact steady solution there), reflecting wall
    /// after it.
    DmrBottom,
    /// Wrap-around connection to the opposite edge (closed O-meshes).
    Periodic,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryTags<S> {
    pub i_min: BoundaryTag<S>,
    pub i_max: BoundaryTag<S>,
    pub j_min: BoundaryTag<S>,
    pub j_max: BoundaryTag<S>,
}

impl<S> Default for BoundaryTags<S> {
    fn default() -> Self {
        BoundaryTags {
            i_min: BoundaryTag::Outflow,
            i_max: BoundaryTag::Outflow,
            j_min: BoundaryTag::Outflow,
            j_max: BoundaryTag::Outflow,
        }
    }
}

/// 2D curvilinear node grid with derived face normals, face lengths and
/// cell areas.
#[derive(Debug, Clone)]
pub struct StructuredMesh<S> {
    pub n_xi: usize,
    pub n_eta: usize,
    /// Node coordinates, (n_xi+1) * (n_eta+1), row-major in i.
    pub nodes: Vec<(S, S)>,
    /// Unit normals of i-faces, (n_xi+1) * n_eta.
    pub i_face_normal: Vec<(S, S)>,
    pub i_face_len: Vec<S>,
    /// Unit normals of j-faces, n_xi * (n_eta+1).
    pub j_face_normal: Vec<(S, S)>,
    pub j_face_len: Vec<S>,
    /// Cell areas, n_xi * n_eta.
    pub cell_area: Vec<S>,
    pub cell_center: Vec<(S, S)>,
    pub boundary: BoundaryTags<S>,
}

impl<S: Scalar> StructuredMesh<S> {
    /// Build a mesh from a node array and fill all derived metric fields.
    pub fn from_nodes(n_xi: usize, n_eta: usize, nodes: Vec<(S, S)>) -> Result<Self> {
        assert_eq!(nodes.len(), (n_xi + 1) * (n_eta + 1));
        let mut mesh = StructuredMesh {
            n_xi,
            n_eta,
            nodes,
            i_face_normal: Vec::new(),
            i_face_len: Vec::new(),
            j_face_normal: Vec::new(),
            j_face_len: Vec::new(),
            cell_area: Vec::new(),
            cell_center: Vec::new(),
            boundary: BoundaryTags::default(),
        };
        mesh.compute_metrics()?;
        Ok(mesh)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> (S, S) {
        self.nodes[j * (self.n_xi + 1) + i]
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.n_xi + i
    }

    #[inline]
    pub fn i_face(&self, i: usize, j: usize) -> usize {
        j * (self.n_xi + 1) + i
    }

    #[inline]
    pub fn j_face(&self, i: usize, j: usize) -> usize {
        j * self.n_xi + i
    }

    pub fn n_cells(&self) -> usize {
        self.n_xi * self.n_eta
    }

    /// Face normals (unit length), face lengths from node coordinates and
    /// quadrilateral cell areas via the shoelace formula.
    pub fn compute_metrics(&mut self) -> Result<()> {
        let (ni, nj) = (self.n_xi, self.n_eta);
        self.i_face_normal = vec![(S::zero(), S::zero()); (ni + 1) * nj];
        self.i_face_len = vec![S::zero(); (ni + 1) * nj];
        for j in 0..nj {
            for i in 0..=ni {
                let (x0, y0) = self.node(i, j);
                let (x1, y1) = self.node(i, j + 1);
                let (dx, dy) = (x1 - x0, y1 - y0);
                let len = (dx * dx + dy * dy).sqrt();
                let idx = j * (ni + 1) + i;
                self.i_face_len[idx] = len;
                // edge rotated -90 deg points in the +xi direction
                self.i_face_normal[idx] = (dy / len, -dx / len);
            }
        }
        self.j_face_normal = vec![(S::zero(), S::zero()); ni * (nj + 1)];
        self.j_face_len = vec![S::zero(); ni * (nj + 1)];
        for j in 0..=nj {
            for i in 0..ni {
                let (x0, y0) = self.node(i, j);
                let (x1, y1) = self.node(i + 1, j);
                let (dx, dy) = (x1 - x0, y1 - y0);
                let len = (dx * dx + dy * dy).sqrt();
                let idx = j * ni + i;
                self.j_face_len[idx] = len;
                // edge rotated +90 deg points in the +eta direction
                self.j_face_normal[idx] = (-dy / len, dx / len);
            }
        }
        self.cell_area = vec![S::zero(); ni * nj];
        self.cell_center = vec![(S::zero(), S::zero()); ni * nj];
        for j in 0..nj {
            for i in 0..ni {
                let corners = [
                    self.node(i, j),
                    self.node(i + 1, j),
                    self.node(i + 1, j + 1),
                    self.node(i, j + 1),
                ];
                let mut area2 = S::zero();
                let mut cx = S::zero();
                let mut cy = S::zero();
                for k in 0..4 {
                    let (xa, ya) = corners[k];
                    let (xb, yb) = corners[(k + 1) % 4];
                    area2 = area2 + (xa * yb - xb * ya);
                    cx = cx + xa;
                    cy = cy + ya;
                }
                let area = S::half() * area2;
                if !(area > S::zero()) {
                    return Err(SolverError::DegenerateCell {
                        i,
                        j,
                        area: area.to_f64().unwrap_or(f64::NAN),
                    });
                }
                let idx = j * ni + i;
                self.cell_area[idx] = area;
                self.cell_center[idx] = (cx / S::lit(4.0), cy / S::lit(4.0));
            }
        }
        Ok(())
    }

    /// Per-cell sum of length-weighted outward face normals; zero for a
    /// watertight cell.
    pub fn closure_defect(&self, i: usize, j: usize) -> (S, S) {
        let ni = self.n_xi;
        let mut sx = S::zero();
        let mut sy = S::zero();
        let faces = [
            (self.i_face_normal[j * (ni + 1) + i], self.i_face_len[j * (ni + 1) + i], -S::one()),
            (
                self.i_face_normal[j * (ni + 1) + i + 1],
                self.i_face_len[j * (ni + 1) + i + 1],
                S::one(),
            ),
            (self.j_face_normal[j * ni + i], self.j_face_len[j * ni + i], -S::one()),
            (
                self.j_face_normal[(j + 1) * ni + i],
                self.j_face_len[(j + 1) * ni + i],
                S::one(),
            ),
        ];
        for ((nx, ny), len, sign) in faces {
            sx = sx + sign * len * nx;
            sy = sy + sign * len * ny;
        }
        (sx, sy)
    }
}

/// Mesh-A node position for parameters (xi, eta): a shock-fitted mesh whose
/// grid lines follow the bow shock around a unit cylinder at the origin.
pub fn mesh_a_point<S: Scalar>(xi: S, eta: S) -> (S, S) {
    let a1 = S::lit(2.45);
    let a2 = S::lit(4.736);
    let a3 = S::lit(3.185);
    let x = (S::one() - xi) * (a1 * eta.cosh() - a2) - xi * eta.cos();
    let y = a3 * (S::one() - xi) * eta.sinh() + xi * eta.sin();
    (x, y)
}

/// Mesh-B node position: concentric cylindrical mesh, radius 3.8 - 2.8 xi.
pub fn mesh_b_point<S: Scalar>(xi: S, eta: S) -> (S, S) {
    let r = S::lit(3.8) - S::lit(2.8) * xi;
    (-r * eta.cos(), r * eta.sin())
}

fn eta_range<S: Scalar>() -> (S, S) {
    let two_pi_fifth = S::lit(2.0 * std::f64::consts::PI / 5.0);
    (-two_pi_fifth, two_pi_fifth)
}

fn generate_cylinder<S: Scalar>(
    n_xi: usize,
    n_eta: usize,
    xi_of_fraction: impl Fn(S) -> S,
    point: impl Fn(S, S) -> (S, S),
) -> Result<StructuredMesh<S>> {
    assert!(n_xi >= 4 && n_eta >= 4);
    let (eta0, eta1) = eta_range::<S>();
    let mut nodes = Vec::with_capacity((n_xi + 1) * (n_eta + 1));
    for j in 0..=n_eta {
        let t_eta = S::from_usize(j).unwrap() / S::from_usize(n_eta).unwrap();
        let eta = eta0 + (eta1 - eta0) * t_eta;
        for i in 0..=n_xi {
            let frac = S::from_usize(i).unwrap() / S::from_usize(n_xi).unwrap();
            let xi = xi_of_fraction(frac);
            nodes.push(point(xi, eta));
        }
    }
    StructuredMesh::from_nodes(n_xi, n_eta, nodes)
}

/// Uniform xi in [1/2, 1]: xi = 1/2 at the outer boundary (i = 0), xi = 1
/// on the cylinder wall (i = n_xi).
fn uniform_xi<S: Scalar>(frac: S) -> S {
    S::half() + S::half() * frac
}

/// Exponentially stretched xi clustering cells toward the wall:
/// xi = (81 - 41 exp(-s)) / 80 with s uniform on [0, ln 41].
fn stretched_xi<S: Scalar>(frac: S) -> S {
    let s = frac * S::lit(41.0).ln();
    (S::lit(81.0) - S::lit(41.0) * (-s).exp()) / S::lit(80.0)
}

/// Shock-fitted cylinder mesh (Mesh-A) with uniform parameter spacing.
pub fn generate_mesh_a<S: Scalar>(n_xi: usize, n_eta: usize) -> Result<StructuredMesh<S>> {
    generate_cylinder(n_xi, n_eta, uniform_xi, mesh_a_point)
}

/// Concentric cylinder mesh (Mesh-B) with uniform parameter spacing.
pub fn generate_mesh_b<S: Scalar>(n_xi: usize, n_eta: usize) -> Result<StructuredMesh<S>> {
    generate_cylinder(n_xi, n_eta, uniform_xi, mesh_b_point)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CylinderMeshKind {
    MeshA,
    MeshB,
}

/// Cylinder mesh with wall-clustered radial spacing for viscous runs.
pub fn apply_viscous_stretching<S: Scalar>(
    kind: CylinderMeshKind,
    n_xi: usize,
    n_eta: usize,
) -> Result<StructuredMesh<S>> {
    match kind {
        CylinderMeshKind::MeshA => generate_cylinder(n_xi, n_eta, stretched_xi, mesh_a_point),
        CylinderMeshKind::MeshB => generate_cylinder(n_xi, n_eta, stretched_xi, mesh_b_point),
    }
}

/// Uniform Cartesian box mesh on [x0, x1] x [y0, y1].
pub fn generate_box<S: Scalar>(
    x0: S,
    x1: S,
    y0: S,
    y1: S,
    nx: usize,
    ny: usize,
) -> Result<StructuredMesh<S>> {
    assert!(x1 > x0 && y1 > y0 && nx >= 1 && ny >= 1);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = y0 + (y1 - y0) * S::from_usize(j).unwrap() / S::from_usize(ny).unwrap();
        for i in 0..=nx {
            let x = x0 + (x1 - x0) * S::from_usize(i).unwrap() / S::from_usize(nx).unwrap();
            nodes.push((x, y));
        }
    }
    StructuredMesh::from_nodes(nx, ny, nodes)
}

/// Full O-mesh around the unit cylinder: i runs radially from the outer
/// boundary (i = 0) to the wall (i = n_r), j runs the full circumference.
/// The j direction closes on itself; tag j_min/j_max as Periodic.
/// Radial node spacing is geometric so near-wall cells stay close to unit
/// aspect ratio.
pub fn generate_o_mesh<S: Scalar>(
    r_outer: S,
    n_r: usize,
    n_theta: usize,
) -> Result<StructuredMesh<S>> {
    assert!(n_r >= 4 && n_theta >= 4 && r_outer > S::one());
    let mut nodes = Vec::with_capacity((n_r + 1) * (n_theta + 1));
    let tau = S::lit(std::f64::consts::TAU);
    for j in 0..=n_theta {
        let theta = tau * S::from_usize(j).unwrap() / S::from_usize(n_theta).unwrap();
        for i in 0..=n_r {
            let frac = S::from_usize(i).unwrap() / S::from_usize(n_r).unwrap();
            // geometric progression from r_outer down to 1; mirrored x
            // keeps the (i, j) quad orientation counter-clockwise
            let r = r_outer.powf(S::one() - frac);
            nodes.push((-r * theta.cos(), r * theta.sin()));
        }
    }
    StructuredMesh::from_nodes(n_r, n_theta, nodes)
}
