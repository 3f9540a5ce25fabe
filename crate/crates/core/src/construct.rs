//! Construction of non-zonal steady states near the degree-2 Rossby-Haurwitz
//! flow.
//!
//! The stream function ansatz is `Psi_eps = Psi_* + eps (Y_2^2 + psi)` with
//! `Psi_* = beta Y_2^0 + gamma Y_1^0`, and `psi` solves
//! `(Delta + 6) psi = f(Psi_* + eps Y_2^2 + eps psi)` on the orthogonal
//! complement of the degree-2 kernel, where `f(z) = A z + B z^2 + c z^3`.
//! The two compatibility conditions `<f(z), Y_2^0> = <f(z), Y_2^2> = 0` are
//! affine in `(A, B)` for fixed `psi`, so each iterate solves them exactly by
//! a 2x2 linear system; the `Y_2^2` row is divided through by `eps`
//! analytically (the zonal parts of `z^2`, `z^3` drop out of it), which keeps
//! the solve well-conditioned down to `eps = 0` and reproduces the
//! leading-order coefficients `a_0`, `b_0` in that limit.

use crate::norms::sobolev_norm;
use crate::sphere::{
    invert_shifted_helmholtz, laplacian, project_out_degree, project_symmetry, GridField,
    SphIndex, SpectralField, Symmetry, Transform, TruncationSpec,
};
use crate::{par, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Physical parameters of the base flow: `Psi_* = beta Y_2^0 + gamma Y_1^0`,
/// with `gamma = sqrt(pi/3) gamma_tilde` the rescaled rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RHParams {
    pub beta: f64,
    pub gamma: f64,
}

impl RHParams {
    pub fn new(beta: f64, gamma: f64) -> Self {
        Self { beta, gamma }
    }

    /// Angular velocity of the sphere, `gamma_tilde = sqrt(3/pi) gamma`.
    pub fn gamma_tilde(&self) -> f64 {
        (3.0 / PI).sqrt() * self.gamma
    }

    /// Construction requires a nontrivial base flow.
    pub fn require_nontrivial(&self) -> Result<()> {
        if self.beta * self.beta + self.gamma * self.gamma <= 0.0 {
            return Err(Error::InvalidParams(
                "construction requires beta^2 + gamma^2 > 0".into(),
            ));
        }
        Ok(())
    }

    /// `Psi_*` as a spectral field.
    pub fn stream_function(&self, trunc: TruncationSpec) -> SpectralField {
        let mut f = SpectralField::zeros(trunc);
        f.set(2, 0, self.beta);
        f.set(1, 0, self.gamma);
        f
    }

    /// Vorticity of the base flow, `Delta Psi_* = -6 beta Y_2^0 - 2 gamma Y_1^0`.
    pub fn vorticity(&self, trunc: TruncationSpec) -> SpectralField {
        let mut f = SpectralField::zeros(trunc);
        f.set(2, 0, -6.0 * self.beta);
        f.set(1, 0, -2.0 * self.gamma);
        f
    }
}

/// `c_{gamma,beta} = (1/2) (1 + gamma^2 + beta^2)^{-2}`, the fixed cubic
/// coefficient that makes the map a contraction.
pub fn c_gamma_beta(p: RHParams) -> f64 {
    let s = 1.0 + p.gamma * p.gamma + p.beta * p.beta;
    0.5 / (s * s)
}

/// Coefficients of the cubic nonlinearity `f(z) = A z + B z^2 + c z^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicNonlinearity {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CubicNonlinearity {
    pub fn eval(&self, z: f64) -> f64 {
        z * (self.a + z * (self.b + z * self.c))
    }
}

/// Knobs of a single construction run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConstructionConfig {
    pub eps: f64,
    /// Galerkin truncation degree.
    pub max_degree: usize,
    /// Stopping tolerance on the H^2 distance of consecutive iterates.
    pub tol_h2: f64,
    pub max_iterations: usize,
    /// Degree of the steady-residual audit; defaults to `3 * max_degree`.
    pub audit_degree: Option<usize>,
}

impl ConstructionConfig {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            max_degree: 24,
            tol_h2: 1e-13,
            max_iterations: 60,
            audit_degree: None,
        }
    }

    pub fn with_degree(mut self, n: usize) -> Self {
        self.max_degree = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParams("eps must be > 0".into()));
        }
        if !(self.tol_h2 > 0.0) {
            return Err(Error::InvalidParams("tol_h2 must be > 0".into()));
        }
        if self.max_degree < 6 {
            return Err(Error::InvalidParams(
                "construction truncation must be at least 6 (the cubic of the base flow has degree 6)".into(),
            ));
        }
        Ok(())
    }
}

/// Measured values and bounds of the three constraints defining the set `X`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct XMembership {
    pub h2_norm: f64,
    pub h2_bound: f64,
    /// `<psi, Psi_* Y_2^2>` and its admissible bound `(gamma^2+beta^2)/(8 sqrt(5 pi))`.
    pub ip_psi_y22: f64,
    pub ip_psi_y22_bound: f64,
    /// `<psi, Psi_*^2 Y_2^2>` and its admissible bound `(gamma^2+beta^2)/3`.
    pub ip_psi2_y22: f64,
    pub ip_psi2_y22_bound: f64,
    pub ok: bool,
}

/// Output of a converged fixed-point run.
#[derive(Debug, Clone)]
pub struct ConstructionResult {
    pub params: RHParams,
    pub eps: f64,
    /// The fixed point `psi_eps`: even-cosine class, no degree-2 content.
    pub psi: SpectralField,
    pub nonlinearity: CubicNonlinearity,
    pub iterations: usize,
    /// Per-step ratios `|psi_{k+1}-psi_k| / |psi_k-psi_{k-1}|` in H^2.
    pub contraction_estimates: Vec<f64>,
    pub x_membership: XMembership,
    /// `|| Delta Psi_eps - 4 gamma Y_1^0 - F_eps(Psi_eps) ||_{L^2}` at the audit degree.
    pub residual_l2: f64,
    /// H^2 distance of the last two iterates.
    pub fixed_point_step: f64,
    /// Largest degree-2 coefficient of `f(z)` seen before projection, over
    /// all iterates (compatibility exactness).
    pub kernel_defect: f64,
    /// Largest symmetry-excluded coefficient of `f(z)` seen before projection.
    pub symmetry_defect: f64,
    /// Whether `|A|, |B|` satisfy the a-priori bounds
    /// `|A| <= 5(1+|beta|)(gamma^2+beta^2)c`, `|B| <= 8(1+|beta|)c`.
    pub ab_bounds_ok: bool,
}

/// Assembled steady state: the stream function and the scalar relation it
/// satisfies.
#[derive(Debug, Clone)]
pub struct SteadySolution {
    /// `Psi_eps = Psi_* + eps (Y_2^2 + psi_eps)`.
    pub stream: SpectralField,
    /// `F_eps(s) = -6 s + eps (A s + B s^2 + c s^3)`.
    pub nonlinearity: SteadyNonlinearity,
    pub residual_l2: f64,
    /// Minimum of `F_eps'` over the attained range of `Psi_eps` on the audit grid.
    pub f_prime_min: f64,
}

/// The full nonlinearity `F_eps` of the steady relation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SteadyNonlinearity {
    pub eps: f64,
    pub cubic: CubicNonlinearity,
}

impl SteadyNonlinearity {
    pub fn eval(&self, s: f64) -> f64 {
        -6.0 * s + self.eps * self.cubic.eval(s)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let c = self.cubic;
        -6.0 + self.eps * (c.a + s * (2.0 * c.b + 3.0 * c.c * s))
    }
}

/// Shared state of one construction: parameter-dependent grids and the base
/// flow tabulated on them.
pub struct Builder {
    pub params: RHParams,
    pub config: ConstructionConfig,
    c: f64,
    plan: Transform,
    trunc_full: TruncationSpec,
    trunc_sym: TruncationSpec,
    psi_star_g: GridField,
    psi_star_sq_g: GridField,
    y22_g: GridField,
}

/// One application of the map, with its audit by-products.
pub struct MapStep {
    pub psi_next: SpectralField,
    pub a: f64,
    pub b: f64,
    pub kernel_defect: f64,
    pub symmetry_defect: f64,
}

impl Builder {
    pub fn new(params: RHParams, config: ConstructionConfig) -> Result<Self> {
        params.require_nontrivial()?;
        config.validate()?;
        let n = config.max_degree;
        let plan = Transform::for_cubic_construction(n);
        let trunc_full = TruncationSpec::new(n);
        let trunc_sym = TruncationSpec::even_cosine(n);
        let psi_star = params.stream_function(trunc_full);
        let psi_star_g = plan.synthesize(&psi_star)?;
        let psi_star_sq_g = psi_star_g.mul(&psi_star_g);
        let y22_g = plan.synthesize(&SpectralField::harmonic(trunc_full, 2, 2))?;
        Ok(Self {
            params,
            config,
            c: c_gamma_beta(params),
            plan,
            trunc_full,
            trunc_sym,
            psi_star_g,
            psi_star_sq_g,
            y22_g,
        })
    }

    pub fn cubic_coefficient(&self) -> f64 {
        self.c
    }

    pub fn plan(&self) -> &Transform {
        &self.plan
    }

    /// Solve the two compatibility conditions for `(A, B)` at the given
    /// iterate, exactly (up to the 2x2 solve). `w = psi + Y_2^2` on the grid.
    fn solve_ab_from_grid(&self, w_g: &GridField, eps: f64) -> Result<(f64, f64)> {
        let grid = self.plan.grid();
        let (nt, np) = (grid.n_theta, grid.n_phi);
        let mut z_g = GridField::zeros(grid);
        let mut row2_b = GridField::zeros(grid); // (2 Psi_* + eps w) w
        let mut row2_r = GridField::zeros(grid); // (3 Psi_*^2 + 3 eps Psi_* w + eps^2 w^2) w
        let mut z2 = GridField::zeros(grid);
        let mut z3 = GridField::zeros(grid);
        for i in 0..nt {
            for j in 0..np {
                let p = self.psi_star_g.values[[i, j]];
                let p2 = self.psi_star_sq_g.values[[i, j]];
                let w = w_g.values[[i, j]];
                let z = p + eps * w;
                z_g.values[[i, j]] = z;
                z2.values[[i, j]] = z * z;
                z3.values[[i, j]] = z * z * z;
                row2_b.values[[i, j]] = (2.0 * p + eps * w) * w;
                row2_r.values[[i, j]] = (3.0 * p2 + eps * w * (3.0 * p + eps * w)) * w;
            }
        }
        let m11 = self.plan.project(&z_g, 2, 0);
        let m12 = self.plan.project(&z2, 2, 0);
        let r1 = -self.c * self.plan.project(&z3, 2, 0);
        let m21 = self.plan.project(w_g, 2, 2);
        let m22 = self.plan.project(&row2_b, 2, 2);
        let r2 = -self.c * self.plan.project(&row2_r, 2, 2);
        let det = m11 * m22 - m12 * m21;
        let scale = m11.hypot(m12) * m21.hypot(m22);
        if det.abs() <= 1e-12 * scale.max(1e-300) {
            return Err(Error::DegenerateCompatibility { det });
        }
        let a = (r1 * m22 - m12 * r2) / det;
        let b = (m11 * r2 - m21 * r1) / det;
        Ok((a, b))
    }

    /// Compatibility solve at a spectral iterate (`psi` in the X class).
    pub fn solve_ab(&self, psi: &SpectralField, eps: f64) -> Result<(f64, f64)> {
        let w_g = self.w_grid(psi)?;
        self.solve_ab_from_grid(&w_g, eps)
    }

    fn w_grid(&self, psi: &SpectralField) -> Result<GridField> {
        let mut w_g = self.plan.synthesize(psi)?;
        w_g.values += &self.y22_g.values;
        Ok(w_g)
    }

    /// One application of the contraction map `K_eps`.
    pub fn apply_map(&self, psi: &SpectralField, eps: f64) -> Result<MapStep> {
        let w_g = self.w_grid(psi)?;
        let (a, b) = self.solve_ab_from_grid(&w_g, eps)?;
        let grid = self.plan.grid();
        let mut f_g = GridField::zeros(grid);
        for i in 0..grid.n_theta {
            for j in 0..grid.n_phi {
                let z = self.psi_star_g.values[[i, j]] + eps * w_g.values[[i, j]];
                f_g.values[[i, j]] = z * (a + z * (b + z * self.c));
            }
        }
        let f_spec = self.plan.analyze(&f_g, self.trunc_full)?;
        let f_norm = f_spec.l2_norm();

        let mut kernel_defect = 0.0_f64;
        for m in -2..=2 {
            kernel_defect = kernel_defect.max(f_spec.get(2, m).abs());
        }
        let mut symmetry_defect = 0.0_f64;
        for (idx, v) in f_spec.iter() {
            if !Symmetry::EvenCosine.admits(idx.m) {
                symmetry_defect = symmetry_defect.max(v.abs());
            }
        }
        if kernel_defect > 1e-9 * f_norm.max(1.0) {
            return Err(Error::CompatibilityFailure {
                defect: kernel_defect,
                limit: 1e-9,
            });
        }
        let projected = project_symmetry(&project_out_degree(&f_spec, 2), Symmetry::EvenCosine);
        let psi_next = invert_shifted_helmholtz(&projected, 2)?;
        Ok(MapStep {
            psi_next,
            a,
            b,
            kernel_defect,
            symmetry_defect,
        })
    }

    /// Iterate `psi <- K_eps(psi)` from `psi = 0` to the fixed point.
    pub fn fixed_point(&self) -> Result<ConstructionResult> {
        let eps = self.config.eps;
        let mut psi = SpectralField::zeros(self.trunc_sym);
        let mut ratios = Vec::new();
        let mut prev_step: Option<f64> = None;
        let mut kernel_defect = 0.0_f64;
        let mut symmetry_defect = 0.0_f64;
        let mut last = (0.0, 0.0);
        let mut converged_at = None;
        let mut step_size = f64::INFINITY;
        for k in 1..=self.config.max_iterations {
            let step = self.apply_map(&psi, eps)?;
            kernel_defect = kernel_defect.max(step.kernel_defect);
            symmetry_defect = symmetry_defect.max(step.symmetry_defect);
            last = (step.a, step.b);
            let diff = step.psi_next.sub(&psi);
            step_size = sobolev_norm(&diff, 2.0);
            if let Some(prev) = prev_step {
                if prev > 0.0 {
                    ratios.push(step_size / prev);
                }
            }
            prev_step = Some(step_size);
            psi = step.psi_next;
            if step_size < self.config.tol_h2 {
                converged_at = Some(k);
                break;
            }
        }
        let iterations = converged_at.ok_or(Error::NoContraction {
            eps,
            iterations: self.config.max_iterations,
            last_step: step_size,
        })?;

        // re-solve (A, B) at the exit iterate so the reported nonlinearity is
        // consistent with the reported psi
        let (a, b) = self.solve_ab(&psi, eps)?;
        let nonlinearity = CubicNonlinearity { a, b, c: self.c };

        let x_membership = self.x_membership(&psi)?;
        let ab_bounds_ok = self.ab_bounds_ok(a, b);
        let mut result = ConstructionResult {
            params: self.params,
            eps,
            psi,
            nonlinearity,
            iterations,
            contraction_estimates: ratios,
            x_membership,
            residual_l2: f64::NAN,
            fixed_point_step: step_size,
            kernel_defect,
            symmetry_defect,
            ab_bounds_ok,
        };
        result.residual_l2 = assemble_solution(&result)?.residual_l2;
        Ok(result)
    }

    fn ab_bounds_ok(&self, a: f64, b: f64) -> bool {
        let p = self.params;
        let amp = p.gamma * p.gamma + p.beta * p.beta;
        let a_bound = 5.0 * (1.0 + p.beta.abs()) * amp * self.c;
        let b_bound = 8.0 * (1.0 + p.beta.abs()) * self.c;
        a.abs() <= a_bound && b.abs() <= b_bound
    }

    fn x_membership(&self, psi: &SpectralField) -> Result<XMembership> {
        let p = self.params;
        let amp = p.gamma * p.gamma + p.beta * p.beta;
        let psi_g = self.plan.synthesize(psi)?;
        let ip1 = self
            .plan
            .project(&psi_g.mul(&self.psi_star_g), 2, 2);
        let ip2 = self
            .plan
            .project(&psi_g.mul(&self.psi_star_sq_g), 2, 2);
        let h2 = sobolev_norm(psi, 2.0);
        let h2_bound = 150.0 * (1.0 + amp) * (1.0 + amp);
        let ip1_bound = 0.125 * amp / (5.0 * PI).sqrt();
        let ip2_bound = amp / 3.0;
        Ok(XMembership {
            h2_norm: h2,
            h2_bound,
            ip_psi_y22: ip1,
            ip_psi_y22_bound: ip1_bound,
            ip_psi2_y22: ip2,
            ip_psi2_y22_bound: ip2_bound,
            ok: h2 <= h2_bound && ip1.abs() <= ip1_bound && ip2.abs() <= ip2_bound,
        })
    }
}

/// Run a full construction: build, iterate, audit.
pub fn construct(params: RHParams, config: ConstructionConfig) -> Result<ConstructionResult> {
    Builder::new(params, config)?.fixed_point()
}

/// Assemble `Psi_eps`, `F_eps` and audit the steady relation
/// `Delta Psi_eps - 4 gamma Y_1^0 = F_eps(Psi_eps)` at the audit degree.
pub fn assemble_solution(result: &ConstructionResult) -> Result<SteadySolution> {
    let n = result.psi.max_degree();
    let eps = result.eps;
    let trunc = TruncationSpec::even_cosine(n);
    let mut stream = result.params.stream_function(trunc);
    stream.add_to(2, 2, eps);
    stream.axpy(eps, &result.psi);

    let nonlinearity = SteadyNonlinearity {
        eps,
        cubic: result.nonlinearity,
    };

    let audit_degree = result.audit_degree();
    let plan = audit_plan(n, audit_degree);
    let stream_g = plan.synthesize(&stream)?;
    let lap_g = plan.synthesize(&laplacian(&stream))?;
    let y10_g = plan.synthesize(&SpectralField::harmonic(TruncationSpec::new(1), 1, 0))?;
    let grid = plan.grid();
    let mut res_g = GridField::zeros(grid);
    let mut f_prime_min = f64::INFINITY;
    for i in 0..grid.n_theta {
        for j in 0..grid.n_phi {
            let s = stream_g.values[[i, j]];
            res_g.values[[i, j]] = lap_g.values[[i, j]]
                - 4.0 * result.params.gamma * y10_g.values[[i, j]]
                - nonlinearity.eval(s);
            f_prime_min = f_prime_min.min(nonlinearity.derivative(s));
        }
    }
    let residual_l2 = grid.integrate_sq(&res_g).sqrt();
    Ok(SteadySolution {
        stream,
        nonlinearity,
        residual_l2,
        f_prime_min,
    })
}

impl ConstructionResult {
    fn audit_degree(&self) -> usize {
        3 * self.psi.max_degree()
    }
}

fn audit_plan(n: usize, audit_degree: usize) -> Transform {
    use crate::sphere::QuadratureGrid;
    // integrand degree: cubic content (3n) against harmonics up to the audit
    // degree; the squared-residual integral needs the same sizing
    let d = (3 * n + audit_degree).max(2 * audit_degree);
    let grid = QuadratureGrid::for_integrand_degree(d);
    Transform::new(grid, audit_degree).expect("audit grid sizes its own degree")
}

/// Closed-form leading-order data: `a_0`, `b_0` and the coefficient lists of
/// `f_0` (zonal) and the non-zonal part of `f_1`.
#[derive(Debug, Clone)]
pub struct LeadingOrderReference {
    pub a0: f64,
    pub b0: f64,
    pub f0: Vec<(SphIndex, f64)>,
    pub f1_nonzonal: Vec<(SphIndex, f64)>,
}

/// The solved `(a_0, b_0)` of the limiting compatibility system.
pub fn a0_b0(params: RHParams) -> (f64, f64) {
    let (beta, gamma) = (params.beta, params.gamma);
    let c = c_gamma_beta(params);
    let denom = 7.0 * gamma * gamma + 15.0 * beta * beta;
    let b0 = -beta * c * (6.0 * gamma * gamma / denom) * (5.0 / PI).sqrt();
    let a0 = -(c / (28.0 * PI))
        * (9.0 * gamma * gamma + 15.0 * beta * beta + 240.0 * beta * beta * gamma * gamma / denom);
    (a0, b0)
}

/// Closed-form `f_0` and non-zonal `f_1` coefficient tables.
///
/// The `Y_3^2` entry of `f_1` is `gamma * sqrt(3/(7 pi)) b_0`, which is what
/// the product expansion `2 b_0 Psi_* Y_2^2` yields.
pub fn f0_f1_reference(params: RHParams) -> LeadingOrderReference {
    let (beta, gamma) = (params.beta, params.gamma);
    let c = c_gamma_beta(params);
    let (a0, b0) = a0_b0(params);
    let (b2, g2) = (beta * beta, gamma * gamma);
    let f0 = vec![
        (
            SphIndex::new(6, 0),
            beta * b2 * (45.0 / (154.0 * PI)) * (5.0_f64 / 13.0).sqrt() * c,
        ),
        (
            SphIndex::new(5, 0),
            b2 * gamma * (15.0 * 33.0_f64.sqrt() / (154.0 * PI)) * c,
        ),
        (
            SphIndex::new(4, 0),
            beta * ((9.0 * (11.0 * g2 + 5.0 * b2) / (77.0 * PI * 5.0_f64.sqrt())) * c
                + beta * (3.0 / (7.0 * PI.sqrt())) * b0),
        ),
        (
            SphIndex::new(3, 0),
            gamma
                * ((3.0 / (10.0 * PI)) * (3.0_f64 / 7.0).sqrt() * (g2 + 5.0 * b2) * c
                    + 3.0 * beta * (3.0 / (35.0 * PI)).sqrt() * b0),
        ),
        (
            SphIndex::new(2, 0),
            beta * a0
                + (7.0 * g2 + 5.0 * b2) / (7.0 * (5.0 * PI).sqrt()) * b0
                + 3.0 * beta * (11.0 * g2 + 5.0 * b2) / (28.0 * PI) * c,
        ),
        (
            SphIndex::new(1, 0),
            gamma
                * ((3.0 / (140.0 * PI)) * (21.0 * g2 + 55.0 * b2) * c
                    + beta * (2.0 / (5.0 * PI).sqrt()) * b0
                    + a0),
        ),
        (
            SphIndex::new(0, 0),
            beta * (21.0 * g2 + 5.0 * b2) / (14.0 * PI * 5.0_f64.sqrt()) * c
                + (g2 + b2) / (2.0 * PI.sqrt()) * b0,
        ),
    ];
    let f1_nonzonal = vec![
        (
            SphIndex::new(6, 2),
            b2 * (45.0 / (11.0 * PI * 182.0_f64.sqrt())) * c,
        ),
        (
            SphIndex::new(5, 2),
            beta * gamma * (3.0 / (2.0 * PI)) * (15.0_f64 / 77.0).sqrt() * c,
        ),
        (
            SphIndex::new(4, 2),
            (3.0 * 3.0_f64.sqrt() / (154.0 * PI)) * (11.0 * g2 - 5.0 * b2) * c
                + beta / 7.0 * (15.0 / PI).sqrt() * b0,
        ),
        (SphIndex::new(3, 2), gamma * (3.0 / (7.0 * PI)).sqrt() * b0),
        (
            SphIndex::new(2, 2),
            a0 - beta * (2.0 / 7.0) * (5.0 / PI).sqrt() * b0
                + 3.0 * (3.0 * g2 + 5.0 * b2) / (28.0 * PI) * c,
        ),
    ];
    LeadingOrderReference {
        a0,
        b0,
        f0,
        f1_nonzonal,
    }
}

/// Leading-order slopes of the non-trivial modes of `psi_eps`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Theorem1Slopes {
    /// `d<psi_eps, Y_6^2>/d eps` at `eps = 0`.
    pub y62: f64,
    /// Internally consistent `d<psi_eps, Y_4^2>/d eps` (from the `f_1`
    /// coefficient list and `b_0`).
    pub y42: f64,
    /// Value printed in the main-theorem display; its second term is missing
    /// a factor `sqrt(3)` relative to the consistent chain, so the two differ
    /// whenever `beta * gamma != 0`.
    pub y42_printed: f64,
    pub printed_discrepancy: bool,
}

/// Closed-form slopes against which extrapolated constructions are checked.
pub fn theorem1_slopes(params: RHParams) -> Theorem1Slopes {
    let (beta, gamma) = (params.beta, params.gamma);
    let c = c_gamma_beta(params);
    let (b2, g2) = (beta * beta, gamma * gamma);
    let y62 = -b2 * (5.0 / (44.0 * PI * 182.0_f64.sqrt())) * c;
    let reference = f0_f1_reference(params);
    let f1_42 = reference.f1_nonzonal[2].1;
    let y42 = -f1_42 / 14.0;
    let y42_printed = -(1.0 / 14.0)
        * ((3.0 * 3.0_f64.sqrt() / (154.0 * PI)) * (11.0 * g2 - 5.0 * b2)
            - b2 * (1.0 / (7.0 * PI)) * (30.0 * g2 / (7.0 * g2 + 15.0 * b2)))
        * c;
    let scale = y42.abs().max(y42_printed.abs()).max(1e-300);
    Theorem1Slopes {
        y62,
        y42,
        y42_printed,
        printed_discrepancy: (y42 - y42_printed).abs() > 1e-12 * scale,
    }
}

/// One row of an epsilon sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub psi_y62: f64,
    pub psi_y42: f64,
    pub psi_y40: f64,
    pub a: f64,
    pub b: f64,
    pub iterations: usize,
    pub residual_l2: f64,
    pub error: Option<String>,
}

/// Richardson-extrapolated leading slope of one observable.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// Difference of the two extrapolations from the last three points.
    pub error_bar: f64,
}

/// Sweep output: rows plus fitted slopes of the marker modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub slope_y62: Option<SlopeFit>,
    pub slope_y42: Option<SlopeFit>,
    pub slope_y40: Option<SlopeFit>,
}

/// Extrapolate `v(eps)/eps -> slope` using the (eps, value) pairs, assuming
/// `v = s0 eps + s1 eps^2 + ...`. Pairs need not be dyadic.
fn richardson_slope(points: &[(f64, f64)]) -> Option<SlopeFit> {
    if points.len() < 2 {
        return None;
    }
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let extrap = |p1: (f64, f64), p2: (f64, f64)| -> f64 {
        let (e1, v1) = p1;
        let (e2, v2) = p2;
        let (t1, t2) = (v1 / e1, v2 / e2);
        (t2 * e1 - t1 * e2) / (e1 - e2)
    };
    let k = pts.len();
    let last = extrap(pts[k - 2], pts[k - 1]);
    let error_bar = if k >= 3 {
        (last - extrap(pts[k - 3], pts[k - 2])).abs()
    } else {
        (last - pts[k - 1].1 / pts[k - 1].0).abs()
    };
    Some(SlopeFit {
        slope: last,
        error_bar,
    })
}

/// Construct at every epsilon in the list (data-parallel) and fit the leading
/// slopes of the marker coefficients. Per-row failures are recorded and the
/// sweep continues.
pub fn epsilon_sweep(
    params: RHParams,
    eps_list: &[f64],
    base: ConstructionConfig,
) -> Result<SweepTable> {
    params.require_nontrivial()?;
    if eps_list.is_empty() {
        return Err(Error::InvalidParams("empty epsilon list".into()));
    }
    let rows: Vec<SweepRow> = par::map_indexed(eps_list.len(), |i| {
        let eps = eps_list[i];
        let mut config = base;
        config.eps = eps;
        match Builder::new(params, config).and_then(|b| b.fixed_point()) {
            Ok(r) => SweepRow {
                eps,
                psi_y62: r.psi.get(6, 2),
                psi_y42: r.psi.get(4, 2),
                psi_y40: r.psi.get(4, 0),
                a: r.nonlinearity.a,
                b: r.nonlinearity.b,
                iterations: r.iterations,
                residual_l2: r.residual_l2,
                error: None,
            },
            Err(e) => SweepRow {
                eps,
                psi_y62: f64::NAN,
                psi_y42: f64::NAN,
                psi_y40: f64::NAN,
                a: f64::NAN,
                b: f64::NAN,
                iterations: 0,
                residual_l2: f64::NAN,
                error: Some(e.to_string()),
            },
        }
    });
    let good = |pick: fn(&SweepRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.error.is_none())
            .map(|r| (r.eps, pick(r)))
            .collect()
    };
    Ok(SweepTable {
        slope_y62: richardson_slope(&good(|r| r.psi_y62)),
        slope_y42: richardson_slope(&good(|r| r.psi_y42)),
        slope_y40: richardson_slope(&good(|r| r.psi_y40)),
        rows,
    })
}

/// Largest epsilon at which the iteration still converges, found by bisection
/// between a converging and a non-converging value.
pub fn find_max_epsilon(params: RHParams, base: ConstructionConfig, hi: f64) -> Result<f64> {
    params.require_nontrivial()?;
    let converges = |eps: f64| -> bool {
        let mut config = base;
        config.eps = eps;
        Builder::new(params, config)
            .and_then(|b| b.fixed_point())
            .is_ok()
    };
    let mut lo = 0.0;
    let mut hi = hi;
    if converges(hi) {
        return Ok(hi);
    }
    for _ in 0..12 {
        let mid = 0.5 * (lo + hi);
        if converges(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn cubic_coefficient_examples() {
        assert_eq!(c_gamma_beta(RHParams::new(0.0, 1.0)), 0.125);
        assert_eq!(c_gamma_beta(RHParams::new(1.0, 0.0)), 0.125);
        assert_eq!(c_gamma_beta(RHParams::new(0.0, 0.0)), 0.5);
        assert!(RHParams::new(0.0, 0.0).require_nontrivial().is_err());
    }

    fn small_config(eps: f64) -> ConstructionConfig {
        ConstructionConfig::new(eps).with_degree(12)
    }

    #[test]
    fn solve_ab_limit_matches_closed_forms() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..6 {
            let params = RHParams::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if params.beta * params.beta + params.gamma * params.gamma < 1e-2 {
                continue;
            }
            let builder = Builder::new(params, small_config(1e-3)).unwrap();
            let zero = SpectralField::zeros(TruncationSpec::even_cosine(12));
            let (a, b) = builder.solve_ab(&zero, 0.0).unwrap();
            let (a0, b0) = a0_b0(params);
            assert!((a - a0).abs() < 1e-13 * a0.abs().max(1.0), "{a} vs {a0}");
            assert!((b - b0).abs() < 1e-13 * b0.abs().max(1.0), "{b} vs {b0}");
        }
    }

    #[test]
    fn solve_ab_beta_zero_special_values() {
        // b_0 is proportional to beta; at beta=0, gamma=1 the closed form
        // gives A = -9/(224 pi)
        let params = RHParams::new(0.0, 1.0);
        let builder = Builder::new(params, small_config(1e-3)).unwrap();
        let zero = SpectralField::zeros(TruncationSpec::even_cosine(12));
        let (a, b) = builder.solve_ab(&zero, 0.0).unwrap();
        assert!(b.abs() < 1e-15);
        let expect = -9.0 / (224.0 * PI);
        assert!((a - expect).abs() < 1e-15, "{a} vs {expect}");
    }

    #[test]
    fn map_at_zero_eps_is_zonal_with_paper_y60() {
        let params = RHParams::new(1.0, 0.0);
        let builder = Builder::new(params, small_config(1e-3)).unwrap();
        let zero = SpectralField::zeros(TruncationSpec::even_cosine(12));
        let step = builder.apply_map(&zero, 0.0).unwrap();
        // zonal output
        for (idx, v) in step.psi_next.iter() {
            if idx.m != 0 {
                assert!(v.abs() < 1e-15, "({},{}) = {v}", idx.n, idx.m);
            }
        }
        // degree-2 content removed
        assert_eq!(step.psi_next.get(2, 0), 0.0);
        // Y_6^0 coefficient: f0 value divided by (6 - 42)
        let c = builder.cubic_coefficient();
        let f0_60 = (45.0 / (154.0 * PI)) * (5.0_f64 / 13.0).sqrt() * c;
        let expect = f0_60 / (6.0 - 42.0);
        let got = step.psi_next.get(6, 0);
        assert!((got - expect).abs() < 1e-15, "{got} vs {expect}");
    }

    #[test]
    fn f0_f1_reference_matches_quadrature() {
        let params = RHParams::new(0.9, -1.4);
        let reference = f0_f1_reference(params);
        let c = c_gamma_beta(params);
        let trunc = TruncationSpec::new(2);
        let psi_star = params.stream_function(trunc);
        let y22 = SpectralField::harmonic(trunc, 2, 2);
        // f_0 = a0 Psi + b0 Psi^2 + c Psi^3 via exact product expansions
        let psi2 = crate::gaunt::expand_product(&psi_star, &psi_star).unwrap();
        let psi3 = crate::gaunt::expand_product(&psi2, &psi_star).unwrap();
        let mut f0 = SpectralField::zeros(TruncationSpec::new(6));
        f0.axpy(reference.a0, &psi_star);
        f0.axpy(reference.b0, &psi2);
        f0.axpy(c, &psi3);
        for (idx, want) in &reference.f0 {
            let got = f0.get(idx.n, idx.m);
            assert!(
                (got - want).abs() < 1e-14,
                "f0 ({},{}) {got} vs {want}",
                idx.n,
                idx.m
            );
        }
        // compatibility rows vanish after substitution
        assert!(reference.f0[4].1.abs() < 1e-16);
        assert!(reference.f1_nonzonal[4].1.abs() < 1e-16);
        // non-zonal f_1 = Y_2^2 (a0 + 2 b0 Psi + 3 c Psi^2)
        let mut combo = psi2.scaled(3.0 * c);
        combo.axpy(2.0 * reference.b0, &psi_star);
        combo.add_to(0, 0, reference.a0 * 2.0 * PI.sqrt()); // constant a0
        let f1 = crate::gaunt::expand_product(&combo, &y22).unwrap();
        for (idx, want) in &reference.f1_nonzonal {
            let got = f1.get(idx.n, idx.m);
            assert!(
                (got - want).abs() < 1e-14,
                "f1 ({},{}) {got} vs {want}",
                idx.n,
                idx.m
            );
        }
    }

    #[test]
    fn fixed_point_small_epsilon_near_zonal_limit() {
        let params = RHParams::new(1.0, 0.0);
        let builder = Builder::new(params, small_config(1e-4)).unwrap();
        let result = builder.fixed_point().unwrap();
        assert!(result.iterations <= 12, "took {}", result.iterations);
        assert!(result.x_membership.ok);
        assert!(result.ab_bounds_ok);
        assert!(result.kernel_defect < 1e-12);
        assert!(result.symmetry_defect < 1e-13);
        // contraction ratios far below the 1/2 + O(eps) bound
        for r in &result.contraction_estimates {
            assert!(*r < 0.5, "ratio {r}");
        }
        // eps -> 0 limit is (Delta+6)^{-1} f_0: compare Y_6^0 content
        let c = c_gamma_beta(params);
        let psi0_60 = (45.0 / (154.0 * PI)) * (5.0_f64 / 13.0).sqrt() * c / (6.0 - 42.0);
        assert!((result.psi.get(6, 0) - psi0_60).abs() < 1e-4 * psi0_60.abs() + 1e-12);
    }

    #[test]
    fn assemble_residual_and_sharpness() {
        let params = RHParams::new(1.0, 0.0);
        let mut config = ConstructionConfig::new(0.05).with_degree(16);
        config.audit_degree = Some(48);
        let result = construct(params, config).unwrap();
        let sol = assemble_solution(&result).unwrap();
        assert!(sol.residual_l2 < 1e-6, "residual {}", sol.residual_l2);
        // degree-6 content of the stream function comes from psi alone
        assert!(
            (sol.stream.get(6, 2) - result.eps * result.psi.get(6, 2)).abs() < 1e-16
        );
        // F_eps' dips below -6 on the attained range for eps > 0
        assert!(sol.f_prime_min < -6.0, "min F' = {}", sol.f_prime_min);
    }

    #[test]
    fn sweep_richardson_hits_theorem_slopes() {
        let params = RHParams::new(1.0, 0.0);
        let table = epsilon_sweep(
            params,
            &[4e-3, 2e-3, 1e-3],
            ConstructionConfig::new(1.0).with_degree(14),
        )
        .unwrap();
        assert!(table.rows.iter().all(|r| r.error.is_none()));
        let slopes = theorem1_slopes(params);
        let got62 = table.slope_y62.unwrap();
        assert!(
            (got62.slope - slopes.y62).abs() < 0.01 * slopes.y62.abs(),
            "{} vs {}",
            got62.slope,
            slopes.y62
        );
        let got42 = table.slope_y42.unwrap();
        assert!(
            (got42.slope - slopes.y42).abs() < 0.01 * slopes.y42.abs(),
            "{} vs {}",
            got42.slope,
            slopes.y42
        );
        // gamma = 0: the printed display agrees with the consistent chain
        assert!(!slopes.printed_discrepancy);
        // beta = gamma = 1: it does not
        assert!(theorem1_slopes(RHParams::new(1.0, 1.0)).printed_discrepancy);
    }

    #[test]
    fn no_contraction_error_carries_context() {
        let params = RHParams::new(1.0, 0.0);
        let mut config = small_config(0.5);
        config.max_iterations = 5;
        // eps far beyond the contraction regime either fails compatibility,
        // degenerates, or runs out of iterations; all are hard errors
        let out = construct(params, config);
        assert!(out.is_err());
    }

    #[test]
    fn theorem1_slope_spec_value_gamma0() {
        // gamma=0, beta=1: slope of <psi, Y_4^2> is (15 sqrt(3))/(17248 pi)
        let s = theorem1_slopes(RHParams::new(1.0, 0.0));
        let expect = 15.0 * 3.0_f64.sqrt() / (17248.0 * PI);
        assert!((s.y42 - expect).abs() < 1e-18);
    }
}
