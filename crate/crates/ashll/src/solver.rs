//! Residual assembly over a structured mesh (convective and viscous
//! fluxes), ghost-cell boundary conditions and explicit TVD Runge-Kutta
//! time advancement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allspeed::{ashll_flux, shock_sensor, AllSpeedKind, ShockSensorField};
use crate::error::{Result, SolverError};
use crate::gas::{
    conserved_to_primitive, primitive_to_conserved, ConservedState, FluxVector, GasModel,
    PrimitiveState,
};
use crate::mesh::{BoundaryTag, StructuredMesh};
use crate::reconstruction::{muscl_faces, LimiterKind};
use crate::riemann::{hll_flux, hllc_flux, hllem_flux};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Hll,
    Hllem,
    Hllc,
    Ashllem,
    Ashllc,
}

impl SchemeKind {
    pub fn is_all_speed(&self) -> bool {
        matches!(self, SchemeKind::Ashllem | SchemeKind::Ashllc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMode {
    GlobalDt,
    LocalDt,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule<S> {
    FinalTime(S),
    MaxIters(usize),
    /// Stop once the density-residual L2 norm has dropped the given number
    /// of orders of magnitude below its initial value (bounded by max_iters).
    ResidualDrop { orders: S, max_iters: usize },
}

/// Shock-front parameters for the double Mach reflection boundary: a
/// moving shock of the given Mach number through `pre`, front inclined at
/// `shock_angle` to the x-axis with its foot at (x0, 0) at t = 0.
#[derive(Debug, Clone, Copy)]
pub struct DmrParams<S> {
    pub x0: S,
    pub shock_angle: S,
    pub mach: S,
    pub pre: PrimitiveState<S>,
    pub post: PrimitiveState<S>,
}

impl<S: Scalar> DmrParams<S> {
    /// x position of the front at height y and time t.
    pub fn shock_x(&self, t: S, y: S, gas: &GasModel<S>) -> S {
        let speed = self.mach * self.pre.sound_speed(gas);
        self.x0 + y / self.shock_angle.tan() + speed * t / self.shock_angle.sin()
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig<S> {
    pub scheme: SchemeKind,
    pub limiter: LimiterKind,
    pub kappa: S,
    pub cfl: S,
    pub time_mode: TimeMode,
    pub rk_order: u8,
    pub viscous: bool,
    pub gas: GasModel<S>,
    pub freestream: PrimitiveState<S>,
    pub stop: StopRule<S>,
    pub dmr: Option<DmrParams<S>>,
}

/// Cell-centered solution array plus step metadata.
#[derive(Debug, Clone)]
pub struct FieldSnapshot<S> {
    pub cells: Vec<ConservedState<S>>,
    pub time: S,
    pub iteration: usize,
    pub residual_l2: [S; 4],
}

impl<S: Scalar> FieldSnapshot<S> {
    pub fn from_primitives(
        states: &[PrimitiveState<S>],
        gas: &GasModel<S>,
    ) -> Self {
        FieldSnapshot {
            cells: states
                .iter()
                .map(|w| primitive_to_conserved(w, gas))
                .collect(),
            time: S::zero(),
            iteration: 0,
            residual_l2: [S::zero(); 4],
        }
    }

    pub fn uniform(mesh: &StructuredMesh<S>, w: &PrimitiveState<S>, gas: &GasModel<S>) -> Self {
        FieldSnapshot {
            cells: vec![primitive_to_conserved(w, gas); mesh.n_cells()],
            time: S::zero(),
            iteration: 0,
            residual_l2: [S::zero(); 4],
        }
    }

    pub fn primitives(&self, gas: &GasModel<S>) -> Result<Vec<PrimitiveState<S>>> {
        self.cells
            .iter()
            .map(|c| conserved_to_primitive(c, gas))
            .collect()
    }
}

/// Primitive states with a one-cell ghost pad on every side.
/// Pad coordinates: (i, j) in [0, n_xi+2) x [0, n_eta+2); interior cell
/// (i, j) sits at pad (i+1, j+1).
#[derive(Debug, Clone)]
pub struct GhostField<S> {
    pub n_xi: usize,
    pub n_eta: usize,
    pub data: Vec<PrimitiveState<S>>,
}

impl<S: Scalar> GhostField<S> {
    #[inline]
    pub fn pad(&self, i: usize, j: usize) -> &PrimitiveState<S> {
        &self.data[j * (self.n_xi + 2) + i]
    }

    #[inline]
    pub fn interior(&self, i: usize, j: usize) -> &PrimitiveState<S> {
        self.pad(i + 1, j + 1)
    }

    #[inline]
    fn set_pad(&mut self, i: usize, j: usize, w: PrimitiveState<S>) {
        self.data[j * (self.n_xi + 2) + i] = w;
    }
}

fn ghost_for_tag<S: Scalar>(
    tag: &BoundaryTag<S>,
    interior: &PrimitiveState<S>,
    outward: (S, S),
    face_mid: (S, S),
    config: &SolverConfig<S>,
    time: S,
) -> PrimitiveState<S> {
    let gas = &config.gas;
    match *tag {
        BoundaryTag::Inflow => config.freestream,
        BoundaryTag::Outflow => *interior,
        BoundaryTag::SlipWall => {
            let q = interior.u * outward.0 + interior.v * outward.1;
            PrimitiveState {
                u: interior.u - S::two() * q * outward.0,
                v: interior.v - S::two() * q * outward.1,
                ..*interior
            }
        }
        BoundaryTag::NoSlipIsothermalWall {
            t_wall,
            u_wall,
            v_wall,
        } => {
            let t_interior = interior.temperature(gas);
            let t_ghost = (S::two() * t_wall - t_interior).max(S::lit(0.05) * t_wall);
            let p = interior.p; // zero-gradient pressure
            PrimitiveState {
                rho: p / (gas.gas_constant * t_ghost),
                u: S::two() * u_wall - interior.u,
                v: S::two() * v_wall - interior.v,
                p,
            }
        }
        BoundaryTag::Farfield => {
            let q_out = interior.u * outward.0 + interior.v * outward.1;
            if q_out > S::zero() {
                *interior
            } else {
                config.freestream
            }
        }
        BoundaryTag::CharacteristicFarfield => {
            let free = &config.freestream;
            let gm1 = gas.gamma - S::one();
            let q_i = interior.u * outward.0 + interior.v * outward.1;
            let q_f = free.u * outward.0 + free.v * outward.1;
            let a_i = interior.sound_speed(gas);
            let a_f = free.sound_speed(gas);
            if q_i >= a_i {
                return *interior; // supersonic outflow
            }
            if q_f <= -a_f {
                return *free; // supersonic inflow
            }
            // outgoing invariant from the interior, incoming from infinity
            let r_plus = q_i + S::two() * a_i / gm1;
            let r_minus = q_f - S::two() * a_f / gm1;
            let q_b = (r_plus + r_minus) * S::half();
            let a_b = gm1 * (r_plus - r_minus) * S::lit(0.25);
            let donor = if q_b > S::zero() { interior } else { free };
            let entropy = donor.p / donor.rho.powf(gas.gamma);
            let rho_b = (a_b * a_b / (gas.gamma * entropy)).powf(S::one() / gm1);
            let p_b = rho_b * a_b * a_b / gas.gamma;
            let q_donor = donor.u * outward.0 + donor.v * outward.1;
            PrimitiveState {
                rho: rho_b,
                u: donor.u + (q_b - q_donor) * outward.0,
                v: donor.v + (q_b - q_donor) * outward.1,
                p: p_b,
            }
        }
        BoundaryTag::DmrExactTop => {
            let dmr = config.dmr.expect("DMR boundary without DMR parameters");
            if face_mid.0 < dmr.shock_x(time, face_mid.1, gas) {
                dmr.post
            } else {
                dmr.pre
            }
        }
        BoundaryTag::DmrBottom => {
            let dmr = config.dmr.expect("DMR boundary without DMR parameters");
            if face_mid.0 < dmr.x0 {
                dmr.post
            } else {
                // reflecting wall
                let q = interior.u * outward.0 + interior.v * outward.1;
                PrimitiveState {
                    u: interior.u - S::two() * q * outward.0,
                    v: interior.v - S::two() * q * outward.1,
                    ..*interior
                }
            }
        }
        // periodic pads are overwritten wholesale afterwards
        BoundaryTag::Periodic => *interior,
    }
}

/// Fill ghost cells for all four edges from the boundary tags.
pub fn apply_boundaries<S: Scalar>(
    primitives: &[PrimitiveState<S>],
    mesh: &StructuredMesh<S>,
    config: &SolverConfig<S>,
    time: S,
) -> GhostField<S> {
    let (ni, nj) = (mesh.n_xi, mesh.n_eta);
    let mut field = GhostField {
        n_xi: ni,
        n_eta: nj,
        data: vec![config.freestream; (ni + 2) * (nj + 2)],
    };
    for j in 0..nj {
        for i in 0..ni {
            field.set_pad(i + 1, j + 1, primitives[mesh.cell(i, j)]);
        }
    }
    let face_mid = |a: (S, S), b: (S, S)| ((a.0 + b.0) * S::half(), (a.1 + b.1) * S::half());

    // i_min and i_max edges
    for j in 0..nj {
        let inter = primitives[mesh.cell(0, j)];
        let n = mesh.i_face_normal[mesh.i_face(0, j)];
        let outward = (-n.0, -n.1);
        let mid = face_mid(mesh.node(0, j), mesh.node(0, j + 1));
        let g = ghost_for_tag(&mesh.boundary.i_min, &inter, outward, mid, config, time);
        field.set_pad(0, j + 1, g);

        let inter = primitives[mesh.cell(ni - 1, j)];
        let outward = mesh.i_face_normal[mesh.i_face(ni, j)];
        let mid = face_mid(mesh.node(ni, j), mesh.node(ni, j + 1));
        let g = ghost_for_tag(&mesh.boundary.i_max, &inter, outward, mid, config, time);
        field.set_pad(ni + 1, j + 1, g);
    }
    // j_min and j_max edges
    for i in 0..ni {
        let inter = primitives[mesh.cell(i, 0)];
        let n = mesh.j_face_normal[mesh.j_face(i, 0)];
        let outward = (-n.0, -n.1);
        let mid = face_mid(mesh.node(i, 0), mesh.node(i + 1, 0));
        let g = ghost_for_tag(&mesh.boundary.j_min, &inter, outward, mid, config, time);
        field.set_pad(i + 1, 0, g);

        let inter = primitives[mesh.cell(i, nj - 1)];
        let outward = mesh.j_face_normal[mesh.j_face(i, nj)];
        let mid = face_mid(mesh.node(i, nj), mesh.node(i + 1, nj));
        let g = ghost_for_tag(&mesh.boundary.j_max, &inter, outward, mid, config, time);
        field.set_pad(i + 1, nj + 1, g);
    }
    // periodic wrap in j (closed O-meshes)
    if mesh.boundary.j_min == BoundaryTag::Periodic {
        for i in 0..ni {
            field.set_pad(i + 1, 0, primitives[mesh.cell(i, nj - 1)]);
            field.set_pad(i + 1, nj + 1, primitives[mesh.cell(i, 0)]);
        }
    }
    // corner pads: average of the two adjacent edge ghosts (only consumed
    // by node-averaged viscous gradients)
    let avg = |a: &PrimitiveState<S>, b: &PrimitiveState<S>| PrimitiveState {
        rho: (a.rho + b.rho) * S::half(),
        u: (a.u + b.u) * S::half(),
        v: (a.v + b.v) * S::half(),
        p: (a.p + b.p) * S::half(),
    };
    let c = avg(field.pad(1, 0), field.pad(0, 1));
    field.set_pad(0, 0, c);
    let c = avg(field.pad(ni, 0), field.pad(ni + 1, 1));
    field.set_pad(ni + 1, 0, c);
    let c = avg(field.pad(0, nj), field.pad(1, nj + 1));
    field.set_pad(0, nj + 1, c);
    let c = avg(field.pad(ni + 1, nj), field.pad(ni, nj + 1));
    field.set_pad(ni + 1, nj + 1, c);
    field
}

/// Convective flux through one face for the configured scheme. `f_p` is the
/// shock-sensor value at the face (1 outside all-speed schemes).
pub fn convective_face_flux<S: Scalar>(
    scheme: SchemeKind,
    left: &PrimitiveState<S>,
    right: &PrimitiveState<S>,
    f_p: S,
    nx: S,
    ny: S,
    gas: &GasModel<S>,
) -> Result<FluxVector<S>> {
    match scheme {
        SchemeKind::Hll => Ok(hll_flux(left, right, nx, ny, gas)),
        SchemeKind::Hllem => Ok(hllem_flux(left, right, nx, ny, gas)),
        SchemeKind::Hllc => Ok(hllc_flux(left, right, nx, ny, gas)
            .unwrap_or_else(|_| hll_flux(left, right, nx, ny, gas))),
        SchemeKind::Ashllem => ashll_flux(AllSpeedKind::Ashllem, left, right, f_p, nx, ny, gas),
        SchemeKind::Ashllc => ashll_flux(AllSpeedKind::Ashllc, left, right, f_p, nx, ny, gas),
    }
}

/// Velocity and temperature gradients at a face by combining the
/// cell-center difference (cross-face direction) with the node-value
/// difference (face-tangent direction); exact for linear fields.
fn face_gradient<S: Scalar>(
    phi_l: S,
    phi_r: S,
    center_l: (S, S),
    center_r: (S, S),
    phi_n0: S,
    phi_n1: S,
    node0: (S, S),
    node1: (S, S),
) -> (S, S) {
    let d1 = (center_r.0 - center_l.0, center_r.1 - center_l.1);
    let l1 = (d1.0 * d1.0 + d1.1 * d1.1).sqrt();
    let e1 = (d1.0 / l1, d1.1 / l1);
    let g1 = (phi_r - phi_l) / l1;
    let d2 = (node1.0 - node0.0, node1.1 - node0.1);
    let l2 = (d2.0 * d2.0 + d2.1 * d2.1).sqrt();
    let e2 = (d2.0 / l2, d2.1 / l2);
    let g2 = (phi_n1 - phi_n0) / l2;
    // solve [e1; e2] grad = [g1; g2]
    let det = e1.0 * e2.1 - e1.1 * e2.0;
    ((g1 * e2.1 - g2 * e1.1) / det, (g2 * e1.0 - g1 * e2.0) / det)
}

struct ViscousContext<'a, S> {
    mesh: &'a StructuredMesh<S>,
    ghosts: &'a GhostField<S>,
    gas: &'a GasModel<S>,
}

impl<'a, S: Scalar> ViscousContext<'a, S> {
    /// Average of the four pad cells around a node (node indices 0..=n).
    fn node_state(&self, i: usize, j: usize) -> (S, S, S) {
        let quarter = S::lit(0.25);
        let mut u = S::zero();
        let mut v = S::zero();
        let mut t = S::zero();
        for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let w = self.ghosts.pad(i + di, j + dj);
            u = u + w.u;
            v = v + w.v;
            t = t + w.temperature(self.gas);
        }
        (u * quarter, v * quarter, t * quarter)
    }

    /// Cell-center coordinate for a pad cell; ghost centers are the
    /// interior center reflected through the boundary face midpoint.
    fn pad_center(&self, i: usize, j: usize) -> (S, S) {
        let (ni, nj) = (self.mesh.n_xi, self.mesh.n_eta);
        let interior = |ci: usize, cj: usize| self.mesh.cell_center[self.mesh.cell(ci, cj)];
        let reflect = |c: (S, S), m: (S, S)| (S::two() * m.0 - c.0, S::two() * m.1 - c.1);
        let mid = |a: (S, S), b: (S, S)| ((a.0 + b.0) * S::half(), (a.1 + b.1) * S::half());
        let ii = i as isize - 1;
        let jj = j as isize - 1;
        if ii >= 0 && jj >= 0 && ii < ni as isize && jj < nj as isize {
            return interior(ii as usize, jj as usize);
        }
        if ii < 0 {
            let cj = jj.clamp(0, nj as isize - 1) as usize;
            let m = mid(self.mesh.node(0, cj), self.mesh.node(0, cj + 1));
            return reflect(interior(0, cj), m);
        }
        if ii >= ni as isize {
            let cj = jj.clamp(0, nj as isize - 1) as usize;
            let m = mid(self.mesh.node(ni, cj), self.mesh.node(ni, cj + 1));
            return reflect(interior(ni - 1, cj), m);
        }
        let ci = ii as usize;
        if jj < 0 {
            let m = mid(self.mesh.node(ci, 0), self.mesh.node(ci + 1, 0));
            reflect(interior(ci, 0), m)
        } else {
            let m = mid(self.mesh.node(ci, nj), self.mesh.node(ci + 1, nj));
            reflect(interior(ci, nj - 1), m)
        }
    }

    /// Newtonian stress + Fourier heat flux through a face between pad
    /// cells (il, jl) and (ir, jr), with face nodes n0 -> n1 oriented so the
    /// face normal points left-to-right. Stokes hypothesis (zero bulk
    /// viscosity).
    #[allow(clippy::too_many_arguments)]
    fn flux(
        &self,
        (il, jl): (usize, usize),
        (ir, jr): (usize, usize),
        n0: (usize, usize),
        n1: (usize, usize),
        nx: S,
        ny: S,
    ) -> FluxVector<S> {
        let wl = self.ghosts.pad(il, jl);
        let wr = self.ghosts.pad(ir, jr);
        let cl = self.pad_center(il, jl);
        let cr = self.pad_center(ir, jr);
        let s0 = self.node_state(n0.0, n0.1);
        let s1 = self.node_state(n1.0, n1.1);
        let p0 = self.mesh.node(n0.0, n0.1);
        let p1 = self.mesh.node(n1.0, n1.1);
        let grad_u = face_gradient(wl.u, wr.u, cl, cr, s0.0, s1.0, p0, p1);
        let grad_v = face_gradient(wl.v, wr.v, cl, cr, s0.1, s1.1, p0, p1);
        let grad_t = face_gradient(
            wl.temperature(self.gas),
            wr.temperature(self.gas),
            cl,
            cr,
            s0.2,
            s1.2,
            p0,
            p1,
        );
        let t_face = S::half() * (wl.temperature(self.gas) + wr.temperature(self.gas));
        let mu = self.gas.viscosity_model.mu(t_face);
        let two_thirds = S::two() / S::lit(3.0);
        let div = grad_u.0 + grad_v.1;
        let tau_xx = mu * (S::two() * grad_u.0 - two_thirds * div);
        let tau_yy = mu * (S::two() * grad_v.1 - two_thirds * div);
        let tau_xy = mu * (grad_u.1 + grad_v.0);
        let cp = self.gas.gamma * self.gas.gas_constant / (self.gas.gamma - S::one());
        let k = mu * cp / self.gas.prandtl;
        let u_face = S::half() * (wl.u + wr.u);
        let v_face = S::half() * (wl.v + wr.v);
        let fx = tau_xx * nx + tau_xy * ny;
        let fy = tau_xy * nx + tau_yy * ny;
        FluxVector {
            mass: S::zero(),
            x_momentum: fx,
            y_momentum: fy,
            energy: u_face * fx + v_face * fy + k * (grad_t.0 * nx + grad_t.1 * ny),
        }
    }
}

/// Residual of one snapshot plus the net boundary flux integral (for
/// discrete conservation checks).
pub struct ResidualEval<S> {
    /// R_i = -(1/|Omega_i|) sum_faces |Gamma| (F_c - F_v), one per cell.
    pub residuals: Vec<ConservedState<S>>,
    /// Sum over boundary faces of |Gamma| F . outward.
    pub boundary_flux: FluxVector<S>,
}

pub fn compute_residual<S: Scalar>(
    snapshot: &FieldSnapshot<S>,
    mesh: &StructuredMesh<S>,
    config: &SolverConfig<S>,
) -> Result<ResidualEval<S>> {
    let (ni, nj) = (mesh.n_xi, mesh.n_eta);
    let gas = &config.gas;
    let primitives: Vec<PrimitiveState<S>> = snapshot
        .cells
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            conserved_to_primitive(c, gas).map_err(|e| match e {
                SolverError::NonPhysicalState { rho, p, .. } => SolverError::NonPhysicalState {
                    rho,
                    p,
                    cell: Some((idx % ni, idx / ni)),
                },
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let ghosts = apply_boundaries(&primitives, mesh, config, snapshot.time);

    let sensor: Option<ShockSensorField<S>> = if config.scheme.is_all_speed() {
        let periodic = |tag: &BoundaryTag<S>| matches!(tag, BoundaryTag::Periodic);
        Some(shock_sensor(
            ni,
            nj,
            &|i, j| ghosts.pad(i, j).p,
            [
                periodic(&mesh.boundary.i_min),
                periodic(&mesh.boundary.i_max),
                periodic(&mesh.boundary.j_min),
                periodic(&mesh.boundary.j_max),
            ],
        ))
    } else {
        None
    };
    let fp_i = |i: usize, j: usize| -> S {
        sensor
            .as_ref()
            .map_or(S::one(), |s| s.fp_i[j * (ni + 1) + i])
    };
    let fp_j = |i: usize, j: usize| -> S {
        sensor.as_ref().map_or(S::one(), |s| s.fp_j[j * ni + i])
    };

    // reconstruction + flux, row by row (i-faces) and column by column
    // (j-faces); rows are independent and run in parallel
    let i_fluxes: Vec<Vec<FluxVector<S>>> = (0..nj)
        .into_par_iter()
        .map(|j| -> Result<Vec<FluxVector<S>>> {
            let line: Vec<PrimitiveState<S>> =
                (0..ni + 2).map(|i| *ghosts.pad(i, j + 1)).collect();
            let faces = muscl_faces(&line, config.limiter, config.kappa);
            (0..=ni)
                .map(|i| {
                    let (nx, ny) = mesh.i_face_normal[mesh.i_face(i, j)];
                    convective_face_flux(
                        config.scheme,
                        &faces[i].0,
                        &faces[i].1,
                        fp_i(i, j),
                        nx,
                        ny,
                        gas,
                    )
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let j_fluxes: Vec<Vec<FluxVector<S>>> = (0..ni)
        .into_par_iter()
        .map(|i| -> Result<Vec<FluxVector<S>>> {
            let line: Vec<PrimitiveState<S>> =
                (0..nj + 2).map(|j| *ghosts.pad(i + 1, j)).collect();
            let faces = muscl_faces(&line, config.limiter, config.kappa);
            (0..=nj)
                .map(|j| {
                    let (nx, ny) = mesh.j_face_normal[mesh.j_face(i, j)];
                    convective_face_flux(
                        config.scheme,
                        &faces[j].0,
                        &faces[j].1,
                        fp_j(i, j),
                        nx,
                        ny,
                        gas,
                    )
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    // viscous contributions are subtracted from the convective flux
    let visc = if config.viscous {
        Some(ViscousContext {
            mesh,
            ghosts: &ghosts,
            gas,
        })
    } else {
        None
    };
    let i_visc: Option<Vec<Vec<FluxVector<S>>>> = visc.as_ref().map(|vc| {
        (0..nj)
            .into_par_iter()
            .map(|j| {
                (0..=ni)
                    .map(|i| {
                        let (nx, ny) = mesh.i_face_normal[mesh.i_face(i, j)];
                        vc.flux((i, j + 1), (i + 1, j + 1), (i, j), (i, j + 1), nx, ny)
                    })
                    .collect()
            })
            .collect()
    });
    let j_visc: Option<Vec<Vec<FluxVector<S>>>> = visc.as_ref().map(|vc| {
        (0..ni)
            .into_par_iter()
            .map(|i| {
                (0..=nj)
                    .map(|j| {
                        let (nx, ny) = mesh.j_face_normal[mesh.j_face(i, j)];
                        vc.flux((i + 1, j), (i + 1, j + 1), (i, j), (i + 1, j), nx, ny)
                    })
                    .collect()
            })
            .collect()
    });

    let net_i = |i: usize, j: usize| -> FluxVector<S> {
        let f = i_fluxes[j][i];
        match &i_visc {
            Some(v) => f - v[j][i],
            None => f,
        }
    };
    let net_j = |i: usize, j: usize| -> FluxVector<S> {
        let f = j_fluxes[i][j];
        match &j_visc {
            Some(v) => f - v[i][j],
            None => f,
        }
    };

    let mut residuals = vec![ConservedState::zero(); ni * nj];
    for j in 0..nj {
        for i in 0..ni {
            let mut sum = FluxVector::zero();
            sum += net_i(i + 1, j) * mesh.i_face_len[mesh.i_face(i + 1, j)];
            sum += net_i(i, j) * (-mesh.i_face_len[mesh.i_face(i, j)]);
            sum += net_j(i, j + 1) * mesh.j_face_len[mesh.j_face(i, j + 1)];
            sum += net_j(i, j) * (-mesh.j_face_len[mesh.j_face(i, j)]);
            let inv_area = -S::one() / mesh.cell_area[mesh.cell(i, j)];
            residuals[mesh.cell(i, j)] = ConservedState {
                rho: sum.mass * inv_area,
                rho_u: sum.x_momentum * inv_area,
                rho_v: sum.y_momentum * inv_area,
                rho_e: sum.energy * inv_area,
            };
        }
    }

    let mut boundary_flux = FluxVector::zero();
    for j in 0..nj {
        boundary_flux += net_i(0, j) * (-mesh.i_face_len[mesh.i_face(0, j)]);
        boundary_flux += net_i(ni, j) * mesh.i_face_len[mesh.i_face(ni, j)];
    }
    for i in 0..ni {
        boundary_flux += net_j(i, 0) * (-mesh.j_face_len[mesh.j_face(i, 0)]);
        boundary_flux += net_j(i, nj) * mesh.j_face_len[mesh.j_face(i, nj)];
    }

    Ok(ResidualEval {
        residuals,
        boundary_flux,
    })
}

/// Allowable time step(s) from the convective (and, for viscous runs,
/// diffusive) spectral radius: dt_i = cfl |Omega_i| / sum |Gamma| (|q| + a).
pub fn stable_dt<S: Scalar>(
    snapshot: &FieldSnapshot<S>,
    mesh: &StructuredMesh<S>,
    config: &SolverConfig<S>,
) -> Result<Vec<S>> {
    let gas = &config.gas;
    let (ni, nj) = (mesh.n_xi, mesh.n_eta);
    let mut dts = Vec::with_capacity(ni * nj);
    for j in 0..nj {
        for i in 0..ni {
            let w = conserved_to_primitive(&snapshot.cells[mesh.cell(i, j)], gas)?;
            let a = w.sound_speed(gas);
            let mut sum = S::zero();
            let mut max_len = S::zero();
            let faces = [
                (mesh.i_face_normal[mesh.i_face(i, j)], mesh.i_face_len[mesh.i_face(i, j)]),
                (
                    mesh.i_face_normal[mesh.i_face(i + 1, j)],
                    mesh.i_face_len[mesh.i_face(i + 1, j)],
                ),
                (mesh.j_face_normal[mesh.j_face(i, j)], mesh.j_face_len[mesh.j_face(i, j)]),
                (
                    mesh.j_face_normal[mesh.j_face(i, j + 1)],
                    mesh.j_face_len[mesh.j_face(i, j + 1)],
                ),
            ];
            for ((nx, ny), len) in faces {
                let q = (w.u * nx + w.v * ny).abs();
                sum = sum + len * (q + a);
                max_len = max_len.max(len);
            }
            let area = mesh.cell_area[mesh.cell(i, j)];
            let mut dt = config.cfl * area / sum;
            if config.viscous {
                let mu = config.gas.viscosity_model.mu(w.temperature(gas));
                if mu > S::zero() {
                    let width = area / max_len;
                    let nu_visc = (S::lit(4.0) * mu / (S::lit(3.0) * w.rho))
                        .max(gas.gamma * mu / (w.rho * gas.prandtl));
                    let dt_visc = config.cfl * width * width / (S::two() * nu_visc);
                    dt = dt.min(dt_visc);
                }
            }
            dts.push(dt);
        }
    }
    Ok(dts)
}

fn axpy<S: Scalar>(
    out: &mut [ConservedState<S>],
    a: S,
    x: &[ConservedState<S>],
    b: S,
    y: &[ConservedState<S>],
    dt: &[S],
    r: &[ConservedState<S>],
) {
    // out = a x + b (y + dt r)
    for i in 0..out.len() {
        out[i] = ConservedState {
            rho: a * x[i].rho + b * (y[i].rho + dt[i] * r[i].rho),
            rho_u: a * x[i].rho_u + b * (y[i].rho_u + dt[i] * r[i].rho_u),
            rho_v: a * x[i].rho_v + b * (y[i].rho_v + dt[i] * r[i].rho_v),
            rho_e: a * x[i].rho_e + b * (y[i].rho_e + dt[i] * r[i].rho_e),
        };
    }
}

/// One explicit TVD Runge-Kutta step (orders 1, 2, 3). Returns the new
/// snapshot; residual norms stored are those of the first stage.
pub fn rk_advance<S: Scalar>(
    snapshot: &FieldSnapshot<S>,
    mesh: &StructuredMesh<S>,
    config: &SolverConfig<S>,
    dt_cap: Option<S>,
) -> Result<FieldSnapshot<S>> {
    let dts_cell = stable_dt(snapshot, mesh, config)?;
    let (dt_global, dts): (S, Vec<S>) = match config.time_mode {
        TimeMode::GlobalDt => {
            let mut dt = dts_cell.iter().cloned().fold(S::infinity(), S::min);
            if let Some(cap) = dt_cap {
                dt = dt.min(cap);
            }
            (dt, vec![dt; dts_cell.len()])
        }
        TimeMode::LocalDt => (dts_cell[0], dts_cell),
    };

    let n = snapshot.cells.len();
    let eval0 = compute_residual(snapshot, mesh, config)?;
    let mut residual_l2 = [S::zero(); 4];
    for r in &eval0.residuals {
        residual_l2[0] = residual_l2[0] + r.rho * r.rho;
        residual_l2[1] = residual_l2[1] + r.rho_u * r.rho_u;
        residual_l2[2] = residual_l2[2] + r.rho_v * r.rho_v;
        residual_l2[3] = residual_l2[3] + r.rho_e * r.rho_e;
    }
    for v in residual_l2.iter_mut() {
        *v = (*v / S::from_usize(n).unwrap()).sqrt();
    }

    let u0 = &snapshot.cells;
    let mut stage = vec![ConservedState::zero(); n];
    let next_time = |s: S| snapshot.time + s;
    let make = |cells: Vec<ConservedState<S>>, time: S| FieldSnapshot {
        cells,
        time,
        iteration: snapshot.iteration + 1,
        residual_l2,
    };

    match config.rk_order {
        1 => {
            axpy(&mut stage, S::zero(), u0, S::one(), u0, &dts, &eval0.residuals);
            Ok(make(stage, next_time(dt_global)))
        }
        2 => {
            axpy(&mut stage, S::zero(), u0, S::one(), u0, &dts, &eval0.residuals);
            let snap1 = make(stage.clone(), next_time(dt_global));
            let eval1 = compute_residual(&snap1, mesh, config)?;
            let mut out = vec![ConservedState::zero(); n];
            axpy(
                &mut out,
                S::half(),
                u0,
                S::half(),
                &snap1.cells,
                &dts,
                &eval1.residuals,
            );
            Ok(make(out, next_time(dt_global)))
        }
        3 => {
            axpy(&mut stage, S::zero(), u0, S::one(), u0, &dts, &eval0.residuals);
            let snap1 = make(stage.clone(), next_time(dt_global));
            let eval1 = compute_residual(&snap1, mesh, config)?;
            let mut u2 = vec![ConservedState::zero(); n];
            axpy(
                &mut u2,
                S::lit(0.75),
                u0,
                S::lit(0.25),
                &snap1.cells,
                &dts,
                &eval1.residuals,
            );
            let snap2 = make(u2, next_time(S::half() * dt_global));
            let eval2 = compute_residual(&snap2, mesh, config)?;
            let mut out = vec![ConservedState::zero(); n];
            axpy(
                &mut out,
                S::lit(1.0 / 3.0),
                u0,
                S::lit(2.0 / 3.0),
                &snap2.cells,
                &dts,
                &eval2.residuals,
            );
            Ok(make(out, next_time(dt_global)))
        }
        o => Err(SolverError::Config(format!("unsupported rk_order {o}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FinalTimeReached,
    MaxItersReached,
    ResidualConverged,
}

#[derive(Debug, Clone)]
pub struct ResidualSample<S> {
    pub iteration: usize,
    pub time: S,
    pub density_residual: S,
}

#[derive(Debug)]
pub struct RunOutcome<S> {
    pub snapshot: FieldSnapshot<S>,
    pub history: Vec<ResidualSample<S>>,
    pub stop: StopReason,
    /// Populated when the run blew up; the snapshot is the last valid one.
    pub failed: Option<String>,
}

/// March the solution until the configured stop rule fires.
pub fn run_to_stop<S: Scalar>(
    initial: FieldSnapshot<S>,
    mesh: &StructuredMesh<S>,
    config: &SolverConfig<S>,
) -> RunOutcome<S> {
    run_with_observer(initial, mesh, config, |_| {})
}

/// [`run_to_stop`] with a callback invoked on every accepted snapshot
/// (including the initial one) for time-history metrics and snapshot dumps.
pub fn run_with_observer<S: Scalar>(
    initial: FieldSnapshot<S>,
    mesh: &StructuredMesh<S>,
    config: &SolverConfig<S>,
    mut observer: impl FnMut(&FieldSnapshot<S>),
) -> RunOutcome<S> {
    let mut snapshot = initial;
    observer(&snapshot);
    let mut history: Vec<ResidualSample<S>> = Vec::new();
    let mut reference_residual: Option<S> = None;
    loop {
        let (dt_cap, done) = match config.stop {
            StopRule::FinalTime(t_end) => {
                if snapshot.time >= t_end - S::lit(1e-14) * t_end.max(S::one()) {
                    (None, true)
                } else {
                    (Some(t_end - snapshot.time), false)
                }
            }
            StopRule::MaxIters(n) => (None, snapshot.iteration >= n),
            StopRule::ResidualDrop { orders, max_iters } => {
                let converged = match (reference_residual, history.last()) {
                    (Some(r0), Some(last)) => {
                        last.density_residual <= r0 * S::lit(10.0).powf(-orders)
                    }
                    _ => false,
                };
                (None, converged || snapshot.iteration >= max_iters)
            }
        };
        if done {
            let stop = match config.stop {
                StopRule::FinalTime(_) => StopReason::FinalTimeReached,
                StopRule::MaxIters(_) => StopReason::MaxItersReached,
                StopRule::ResidualDrop { orders, .. } => {
                    let converged = match (reference_residual, history.last()) {
                        (Some(r0), Some(last)) => {
                            last.density_residual <= r0 * S::lit(10.0).powf(-orders)
                        }
                        _ => false,
                    };
                    if converged {
                        StopReason::ResidualConverged
                    } else {
                        StopReason::MaxItersReached
                    }
                }
            };
            return RunOutcome {
                snapshot,
                history,
                stop,
                failed: None,
            };
        }
        match rk_advance(&snapshot, mesh, config, dt_cap) {
            Ok(next) => {
                if reference_residual.is_none() && next.residual_l2[0] > S::zero() {
                    reference_residual = Some(next.residual_l2[0]);
                }
                history.push(ResidualSample {
                    iteration: next.iteration,
                    time: next.time,
                    density_residual: next.residual_l2[0],
                });
                snapshot = next;
                observer(&snapshot);
            }
            Err(e) => {
                return RunOutcome {
                    snapshot,
                    history,
                    stop: StopReason::MaxItersReached,
                    failed: Some(e.to_string()),
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::physical_flux;
    use crate::mesh::{generate_box, generate_mesh_a, BoundaryTags};
    use crate::oracles::exact_riemann;

    fn gas() -> GasModel<f64> {
        GasModel::air()
    }

    fn base_config(scheme: SchemeKind) -> SolverConfig<f64> {
        SolverConfig {
            scheme,
            limiter: LimiterKind::Minmod,
            kappa: 1.0 / 3.0,
            cfl: 0.4,
            time_mode: TimeMode::GlobalDt,
            rk_order: 2,
            viscous: false,
            gas: gas(),
            freestream: PrimitiveState::new(1.4, 0.0, 0.0, 1.0),
            stop: StopRule::MaxIters(1),
            dmr: None,
        }
    }

    #[test]
    fn free_stream_preserved_on_curved_mesh() {
        let mut mesh = generate_mesh_a(24, 48).unwrap();
        mesh.boundary = BoundaryTags {
            i_min: BoundaryTag::Farfield,
            i_max: BoundaryTag::Farfield,
            j_min: BoundaryTag::Farfield,
            j_max: BoundaryTag::Farfield,
        };
        let free = PrimitiveState::new(1.3, 0.7, -0.4, 2.1);
        for scheme in [
            SchemeKind::Hll,
            SchemeKind::Hllem,
            SchemeKind::Hllc,
            SchemeKind::Ashllem,
            SchemeKind::Ashllc,
        ] {
            let mut config = base_config(scheme);
            config.freestream = free;
            let snap = FieldSnapshot::uniform(&mesh, &free, &config.gas);
            let eval = compute_residual(&snap, &mesh, &config).unwrap();
            for r in &eval.residuals {
                for v in [r.rho, r.rho_u, r.rho_v, r.rho_e] {
                    assert!(v.abs() < 1e-11, "{scheme:?}: residual {v:e}");
                }
            }
        }
    }

    #[test]
    fn uniform_viscous_flow_has_zero_viscous_residual() {
        let mut mesh = generate_mesh_a(16, 32).unwrap();
        mesh.boundary = BoundaryTags {
            i_min: BoundaryTag::Farfield,
            i_max: BoundaryTag::Farfield,
            j_min: BoundaryTag::Farfield,
            j_max: BoundaryTag::Farfield,
        };
        let free = PrimitiveState::new(1.0, 0.5, 0.2, 1.0);
        let mut config = base_config(SchemeKind::Hllc);
        config.freestream = free;
        config.viscous = true;
        config.gas.viscosity_model = crate::gas::ViscosityModel::Constant { mu: 1e-2 };
        let snap = FieldSnapshot::uniform(&mesh, &free, &config.gas);
        let eval = compute_residual(&snap, &mesh, &config).unwrap();
        for r in &eval.residuals {
            for v in [r.rho, r.rho_u, r.rho_v, r.rho_e] {
                assert!(v.abs() < 1e-10, "residual {v:e}");
            }
        }
    }

    #[test]
    fn slip_wall_preserves_tangential_uniform_flow() {
        let mut mesh = generate_box(0.0, 1.0, 0.0, 0.25, 20, 5).unwrap();
        mesh.boundary = BoundaryTags {
            i_min: BoundaryTag::Inflow,
            i_max: BoundaryTag::Outflow,
            j_min: BoundaryTag::SlipWall,
            j_max: BoundaryTag::SlipWall,
        };
        let free = PrimitiveState::new(1.2, 0.8, 0.0, 1.0);
        let mut config = base_config(SchemeKind::Ashllc);
        config.freestream = free;
        let snap = FieldSnapshot::uniform(&mesh, &free, &config.gas);
        let eval = compute_residual(&snap, &mesh, &config).unwrap();
        for r in &eval.residuals {
            assert!(r.rho.abs() < 1e-12 && r.rho_v.abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_conservation_matches_boundary_flux() {
        let mesh = generate_box(0.0f64, 1.0, 0.0, 1.0, 16, 16).unwrap();
        let g = gas();
        let states: Vec<PrimitiveState<f64>> = (0..mesh.n_cells())
            .map(|idx| {
                let (cx, cy) = mesh.cell_center[idx];
                let r2 = (cx - 0.5).powi(2) + (cy - 0.5).powi(2);
                let bump = (-20.0 * r2).exp();
                PrimitiveState::new(1.0 + 0.2 * bump, 0.3, 0.1, 1.0 + 0.3 * bump)
            })
            .collect();
        let snap = FieldSnapshot::from_primitives(&states, &g);
        for scheme in [SchemeKind::Hllem, SchemeKind::Ashllem, SchemeKind::Hllc] {
            let config = base_config(scheme);
            let eval = compute_residual(&snap, &mesh, &config).unwrap();
            let mut sums = [0.0f64; 4];
            for (idx, r) in eval.residuals.iter().enumerate() {
                let a = mesh.cell_area[idx];
                sums[0] += a * r.rho;
                sums[1] += a * r.rho_u;
                sums[2] += a * r.rho_v;
                sums[3] += a * r.rho_e;
            }
            let b = eval.boundary_flux;
            for (s, f) in sums
                .iter()
                .zip([b.mass, b.x_momentum, b.y_momentum, b.energy])
            {
                assert!((s + f).abs() < 1e-10, "{scheme:?}: {s} vs {f}");
            }
        }
    }

    #[test]
    fn stable_dt_unit_cell_example() {
        let mesh = generate_box(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap();
        let mut config = base_config(SchemeKind::Hll);
        config.cfl = 0.5;
        let w = PrimitiveState::new(1.4, 0.0, 0.0, 1.0); // a = 1
        let snap = FieldSnapshot::uniform(&mesh, &w, &config.gas);
        let dts = stable_dt(&snap, &mesh, &config).unwrap();
        assert!((dts[0] - 0.125).abs() < 1e-14);
    }

    #[test]
    fn viscous_dt_limit_engages() {
        let mesh = generate_box(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap();
        let mut config = base_config(SchemeKind::Hll);
        config.cfl = 0.5;
        config.viscous = true;
        config.gas.viscosity_model = crate::gas::ViscosityModel::Constant { mu: 10.0 };
        let w = PrimitiveState::new(1.4, 0.0, 0.0, 1.0);
        let snap = FieldSnapshot::uniform(&mesh, &w, &config.gas);
        let dts = stable_dt(&snap, &mesh, &config).unwrap();
        // diffusive limit: nu = max(40/(3*1.4), 1.4*10/(1.4*0.72)) with a
        // unit-width cell
        let nu = (40.0 / (3.0 * 1.4f64)).max(10.0 / 0.72);
        assert!((dts[0] - 0.5 / (2.0 * nu)).abs() < 1e-14);
    }

    #[test]
    fn dmr_shock_front_position() {
        let pre = PrimitiveState::new(1.4, 0.0, 0.0, 1.0);
        let dmr = DmrParams {
            x0: 1.0 / 6.0,
            shock_angle: 60.0f64.to_radians(),
            mach: 10.0,
            pre,
            post: PrimitiveState::new(8.0, 7.1447095812216181, -4.125, 116.5),
        };
        let g = gas();
        assert!((dmr.shock_x(0.0, 0.0, &g) - 1.0 / 6.0).abs() < 1e-14);
        // top-wall formula at y = 1: x0 + (1 + 20 t) / tan(60 deg)
        for t in [0.0, 0.1, 0.2] {
            let expected = 1.0 / 6.0 + (1.0 + 20.0 * t) / 60.0f64.to_radians().tan();
            assert!((dmr.shock_x(t, 1.0, &g) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_wrap_fills_ghosts_from_opposite_side() {
        let mut mesh = generate_box(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        mesh.boundary.j_min = BoundaryTag::Periodic;
        mesh.boundary.j_max = BoundaryTag::Periodic;
        let g = gas();
        let states: Vec<PrimitiveState<f64>> = (0..16)
            .map(|k| PrimitiveState::new(1.0 + 0.01 * k as f64, 0.0, 0.0, 1.0))
            .collect();
        let config = base_config(SchemeKind::Hll);
        let field = apply_boundaries(&states, &mesh, &config, 0.0);
        for i in 0..4 {
            assert_eq!(field.pad(i + 1, 0).rho, states[mesh.cell(i, 3)].rho);
            assert_eq!(field.pad(i + 1, 5).rho, states[mesh.cell(i, 0)].rho);
        }
        let _ = g;
    }

    #[test]
    fn no_slip_ghost_reverses_velocity() {
        let mut mesh = generate_box(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        mesh.boundary.j_min = BoundaryTag::NoSlipIsothermalWall {
            t_wall: 1.0 / (1.4 * 287.0),
            u_wall: 0.0,
            v_wall: 0.0,
        };
        let mut config = base_config(SchemeKind::Hllc);
        config.gas.gas_constant = 287.0;
        let w = PrimitiveState::new(1.4, 0.5, 0.25, 1.0); // T = 1/(1.4*287)
        let states = vec![w; 4];
        let field = apply_boundaries(&states, &mesh, &config, 0.0);
        let ghost = field.pad(1, 0);
        assert!((ghost.u + 0.5).abs() < 1e-13);
        assert!((ghost.v + 0.25).abs() < 1e-13);
        assert!((ghost.rho - 1.4).abs() < 1e-12);
    }

    #[test]
    fn sod_matches_exact_solution() {
        let mesh = {
            let mut m = generate_box(0.0, 1.0, 0.0, 0.02, 100, 2).unwrap();
            m.boundary = BoundaryTags {
                i_min: BoundaryTag::Outflow,
                i_max: BoundaryTag::Outflow,
                j_min: BoundaryTag::Outflow,
                j_max: BoundaryTag::Outflow,
            };
            m
        };
        let g = gas();
        let left = PrimitiveState::new(1.0, 0.0, 0.0, 1.0);
        let right = PrimitiveState::new(0.125, 0.0, 0.0, 0.1);
        let states: Vec<PrimitiveState<f64>> = (0..mesh.n_cells())
            .map(|idx| {
                if mesh.cell_center[idx].0 < 0.5 {
                    left
                } else {
                    right
                }
            })
            .collect();
        let exact = exact_riemann(&left, &right, &g).unwrap();
        for scheme in [SchemeKind::Hllc, SchemeKind::Ashllc] {
            let mut config = base_config(scheme);
            config.stop = StopRule::FinalTime(0.2);
            let snap = FieldSnapshot::from_primitives(&states, &g);
            let outcome = run_to_stop(snap, &mesh, &config);
            assert!(outcome.failed.is_none(), "{:?}", outcome.failed);
            assert_eq!(outcome.stop, StopReason::FinalTimeReached);
            assert!((outcome.snapshot.time - 0.2).abs() < 1e-12);
            let prims = outcome.snapshot.primitives(&g).unwrap();
            let mut l1 = 0.0;
            for i in 0..100 {
                let x = mesh.cell_center[mesh.cell(i, 0)].0;
                let w = exact.sample((x - 0.5) / 0.2);
                l1 += (prims[mesh.cell(i, 0)].rho - w.rho).abs() * 0.01;
            }
            assert!(l1 < 0.02, "{scheme:?}: L1 = {l1}");
        }
    }

    #[test]
    fn rk3_tracks_acoustic_pulse_better_than_rk1() {
        // smooth pulse advected for a short time; higher-order time
        // integration with the same residual operator must not be worse
        let mesh = {
            let mut m = generate_box(0.0f64, 1.0, 0.0, 0.05, 64, 1).unwrap();
            m.boundary = BoundaryTags {
                i_min: BoundaryTag::Outflow,
                i_max: BoundaryTag::Outflow,
                j_min: BoundaryTag::Outflow,
                j_max: BoundaryTag::Outflow,
            };
            m
        };
        let g = gas();
        let states: Vec<PrimitiveState<f64>> = (0..mesh.n_cells())
            .map(|idx| {
                let x = mesh.cell_center[idx].0;
                let bump = 0.1 * (-200.0 * (x - 0.5).powi(2)).exp();
                PrimitiveState::new(1.0 + bump, 0.0, 0.0, 1.0 + 1.4 * bump)
            })
            .collect();
        let run = |order: u8, cfl: f64| -> Vec<f64> {
            let mut config = base_config(SchemeKind::Hllem);
            config.rk_order = order;
            config.cfl = cfl;
            config.limiter = LimiterKind::VanAlbada;
            config.stop = StopRule::FinalTime(0.05);
            let snap = FieldSnapshot::from_primitives(&states, &g);
            let out = run_to_stop(snap, &mesh, &config);
            assert!(out.failed.is_none());
            out.snapshot
                .primitives(&g)
                .unwrap()
                .iter()
                .map(|w| w.rho)
                .collect()
        };
        let reference = run(3, 0.05);
        let coarse1 = run(1, 0.8);
        let coarse3 = run(3, 0.8);
        let err = |a: &[f64]| -> f64 {
            a.iter()
                .zip(&reference)
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>()
        };
        assert!(err(&coarse3) < err(&coarse1));
    }

    #[test]
    fn local_time_stepping_converges_steady_flow() {
        // uniform supersonic channel flow converges immediately; residual
        // drop rule reaches its floor without tripping max_iters
        let mut mesh = generate_box(0.0, 1.0, 0.0, 0.5, 10, 5).unwrap();
        mesh.boundary = BoundaryTags {
            i_min: BoundaryTag::Inflow,
            i_max: BoundaryTag::Outflow,
            j_min: BoundaryTag::SlipWall,
            j_max: BoundaryTag::SlipWall,
        };
        let free = PrimitiveState::new(1.4, 2.0, 0.0, 1.0);
        let mut config = base_config(SchemeKind::Hllc);
        config.freestream = free;
        config.time_mode = TimeMode::LocalDt;
        config.rk_order = 1;
        config.stop = StopRule::ResidualDrop {
            orders: 6.0,
            max_iters: 5000,
        };
        let mut states = vec![free; mesh.n_cells()];
        // perturb one interior cell so there is a residual to converge
        states[mesh.cell(5, 2)] = PrimitiveState::new(1.5, 2.0, 0.05, 1.1);
        let snap = FieldSnapshot::from_primitives(&states, &config.gas);
        let outcome = run_to_stop(snap, &mesh, &config);
        assert!(outcome.failed.is_none());
        assert_eq!(outcome.stop, StopReason::ResidualConverged);
        assert!(outcome.history.len() < 5000);
    }

    #[test]
    fn first_order_step_is_forward_euler() {
        // one RK1 step on a two-cell line must equal the hand-assembled
        // finite-volume update
        let mut mesh = generate_box(0.0, 2.0, 0.0, 1.0, 2, 1).unwrap();
        mesh.boundary = BoundaryTags {
            i_min: BoundaryTag::Outflow,
            i_max: BoundaryTag::Outflow,
            j_min: BoundaryTag::SlipWall,
            j_max: BoundaryTag::SlipWall,
        };
        let g = gas();
        let wl = PrimitiveState::new(1.0, 0.0, 0.0, 1.0);
        let wr = PrimitiveState::new(0.5, 0.0, 0.0, 0.5);
        let mut config = base_config(SchemeKind::Hll);
        config.rk_order = 1;
        config.limiter = LimiterKind::FirstOrder;
        let snap = FieldSnapshot::from_primitives(&[wl, wr], &g);
        let dts = stable_dt(&snap, &mesh, &config).unwrap();
        let dt = dts[0].min(dts[1]);
        let next = rk_advance(&snap, &mesh, &config, None).unwrap();
        let f_mid = crate::riemann::hll_flux(&wl, &wr, 1.0, 0.0, &g);
        let f_left = physical_flux(&wl, 1.0, 0.0, &g);
        let expected = wl.rho - dt * (f_mid.mass - f_left.mass);
        assert!((next.cells[0].rho - expected).abs() < 1e-14);
    }
}
