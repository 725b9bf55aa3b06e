//! Dense primal-dual interior-point solver for standard-form SDPs with
//! block-diagonal variables.
//!
//! Infeasible-start path following with Nesterov-Todd scaling and a
//! Mehrotra-style adaptive centering parameter: the affine direction fixes
//! sigma, then the centering direction is recomputed against the same Schur
//! factorization. Step lengths keep both iterates strictly inside the cone.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::linalg::max_psd_step;
use crate::rational::rat_to_f64;
use crate::sdp::{SparseSymMat, StandardFormSDP};

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Target absolute duality gap |<C,X> - b'y|.
    pub eps: f64,
    /// Normalized primal/dual residual tolerance.
    pub feasibility_tol: f64,
    pub max_iter: usize,
    /// Optional feasible-ish block matrix to start from (damped internally).
    pub initial_point: Option<Vec<DMatrix<f64>>>,
    /// Iteration log on standard error.
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-8,
            feasibility_tol: 1e-8,
            max_iter: 200,
            initial_point: None,
            verbose: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    OptimalToEps,
    MaxIter,
    InfeasibleDetected,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub primal_blocks: Vec<DMatrix<f64>>,
    pub dual_y: Vec<f64>,
    /// Dual slack blocks Z; for the moment relaxation these are the Gram
    /// matrices of the weighted sum-of-squares certificate.
    pub dual_slack_blocks: Vec<DMatrix<f64>>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

struct FloatData {
    dims: Vec<usize>,
    cost: Vec<(usize, usize, usize, f64)>,
    rows: Vec<Vec<(usize, usize, usize, f64)>>,
    b: Vec<f64>,
}

fn to_float(a: &SparseSymMat) -> Vec<(usize, usize, usize, f64)> {
    a.entries
        .iter()
        .map(|(b, r, c, v)| (*b, *r, *c, rat_to_f64(v)))
        .collect()
}

fn pair(a: &[(usize, usize, usize, f64)], x: &[DMatrix<f64>]) -> f64 {
    let mut acc = 0.0;
    for &(b, r, c, v) in a {
        let w = if r == c { v } else { 2.0 * v };
        acc += w * x[b][(r, c)];
    }
    acc
}

fn add_scaled(a: &[(usize, usize, usize, f64)], w: f64, out: &mut [DMatrix<f64>]) {
    for &(b, r, c, v) in a {
        out[b][(r, c)] += w * v;
        if r != c {
            out[b][(c, r)] += w * v;
        }
    }
}

fn frob(a: &[(usize, usize, usize, f64)]) -> f64 {
    let mut acc = 0.0;
    for &(_, r, c, v) in a {
        acc += if r == c { v * v } else { 2.0 * v * v };
    }
    acc.sqrt()
}

fn zeros(dims: &[usize]) -> Vec<DMatrix<f64>> {
    dims.iter().map(|&d| DMatrix::zeros(d, d)).collect()
}

fn identity_scaled(dims: &[usize], s: f64) -> Vec<DMatrix<f64>> {
    dims.iter().map(|&d| DMatrix::identity(d, d) * s).collect()
}

fn block_dot(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric spectral function: applies f to the eigenvalues.
fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        d[(i, i)] = f(eig.eigenvalues[i]);
    }
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Solves min <C,X> s.t. <A_k,X> = b_k, X PSD (block-diagonal).
pub fn solve_sdp(sdp: &StandardFormSDP, cfg: &SolverConfig) -> Result<SdpSolution, Error> {
    let data = FloatData {
        dims: sdp.block_dims.clone(),
        cost: to_float(&sdp.cost),
        rows: sdp.constraints.iter().map(|c| to_float(&c.a)).collect(),
        b: sdp.constraints.iter().map(|c| rat_to_f64(&c.b)).collect(),
    };
    let k = data.rows.len();
    let n_tot: usize = data.dims.iter().sum();
    if n_tot == 0 || k == 0 {
        return Err(Error::Invalid("empty SDP".into()));
    }
    let nf = n_tot as f64;

    let norm_b = data.b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let norm_c = data.cost.iter().fold(0.0f64, |a, &(_, _, _, v)| a.max(v.abs()));
    let max_row_frob = data.rows.iter().map(|r| frob(r)).fold(0.0f64, f64::max);

    // Initial iterates (SDPT3-style scaling heuristics).
    let xi = {
        let mut s = 10.0f64.max(nf.sqrt());
        for (row, &bk) in data.rows.iter().zip(&data.b) {
            s = s.max(nf * (1.0 + bk.abs()) / (1.0 + frob(row)));
        }
        s
    };
    let eta = 10.0f64
        .max(nf.sqrt())
        .max(frob(&data.cost))
        .max(max_row_frob);
    let mut x = match &cfg.initial_point {
        Some(x0) => {
            if x0.len() != data.dims.len()
                || x0.iter().zip(&data.dims).any(|(m, &d)| m.nrows() != d)
            {
                return Err(Error::Invalid("initial point has wrong block shape".into()));
            }
            let tr: f64 = x0.iter().map(|m| m.trace()).sum();
            let delta = 0.1 * (1.0 + tr / nf);
            x0.iter()
                .zip(&data.dims)
                .map(|(m, &d)| sym(m) + DMatrix::identity(d, d) * delta)
                .collect()
        }
        None => identity_scaled(&data.dims, xi),
    };
    let mut z = identity_scaled(&data.dims, eta);
    let mut y = vec![0.0f64; k];

    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let mut pobj = 0.0;
    let mut dobj = 0.0;
    let mut pres = f64::INFINITY;
    let mut dres = f64::INFINITY;

    for iter in 0..cfg.max_iter {
        iterations = iter;

        // Residuals.
        let rp: Vec<f64> = (0..k).map(|j| data.b[j] - pair(&data.rows[j], &x)).collect();
        let mut rd = zeros(&data.dims);
        add_scaled(&data.cost, 1.0, &mut rd);
        for (j, row) in data.rows.iter().enumerate() {
            add_scaled(row, -y[j], &mut rd);
        }
        for (b, zb) in rd.iter_mut().zip(&z) {
            *b -= zb;
        }

        pobj = pair(&data.cost, &x);
        dobj = data.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let gap = pobj - dobj;
        let mu = block_dot(&x, &z) / nf;

        pres = rp.iter().fold(0.0f64, |a, &v| a.max(v.abs())) / (1.0 + norm_b);
        dres = rd
            .iter()
            .map(|m| m.iter().fold(0.0f64, |a, &v| a.max(v.abs())))
            .fold(0.0f64, f64::max)
            / (1.0 + norm_c);

        if cfg.verbose {
            eprintln!(
                "iter {iter:3}: mu={mu:9.3e} gap={gap:10.3e} pres={pres:9.3e} dres={dres:9.3e}"
            );
        }

        if gap.abs() <= cfg.eps && pres <= cfg.feasibility_tol && dres <= cfg.feasibility_tol {
            status = SolveStatus::OptimalToEps;
            break;
        }

        // Divergence heuristic: dual objective racing away while dual
        // residuals stay tiny certifies primal infeasibility.
        let y_norm = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if y_norm > 1e9 * (1.0 + norm_b) && dres < cfg.feasibility_tol {
            status = SolveStatus::InfeasibleDetected;
            break;
        }
        if mu < 1e-16 && (pres > cfg.feasibility_tol || dres > cfg.feasibility_tol) {
            break; // stalled
        }

        // Nesterov-Todd scaling point per block. Eigenvalues of Z are
        // floored relative to the block's largest one: near the boundary
        // roundoff can push tiny eigenvalues negative, and an unguarded
        // reciprocal square root would overflow into NaN.
        let mut w = Vec::with_capacity(x.len());
        let mut zinv = Vec::with_capacity(x.len());
        let mut scaling_ok = true;
        for (xb, zb) in x.iter().zip(&z) {
            let eig = zb.clone().symmetric_eigen();
            let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e));
            let floor = (lam_max * 1e-16).max(1e-60);
            let rebuild = |f: &dyn Fn(f64) -> f64| {
                let mut d = DMatrix::zeros(zb.nrows(), zb.ncols());
                for i in 0..zb.nrows() {
                    d[(i, i)] = f(eig.eigenvalues[i].max(floor));
                }
                sym(&(&eig.eigenvectors * d * eig.eigenvectors.transpose()))
            };
            let zh = rebuild(&|e| e.sqrt());
            let zih = rebuild(&|e| 1.0 / e.sqrt());
            zinv.push(rebuild(&|e| 1.0 / e));
            let mid = sym(&(&zh * xb * &zh));
            let mid_h = spectral_map(&mid, |e| e.max(0.0).sqrt());
            let wb = sym(&(&zih * mid_h * &zih));
            if !wb.iter().all(|v| v.is_finite()) {
                scaling_ok = false;
            }
            w.push(wb);
        }
        if !scaling_ok {
            break; // iterate too close to the boundary to scale
        }

        // Schur complement M[j][l] = <A_j, W A_l W>.
        let mut m = DMatrix::zeros(k, k);
        for l in 0..k {
            let mut t = zeros(&data.dims);
            add_scaled(&data.rows[l], 1.0, &mut t);
            let t: Vec<DMatrix<f64>> = t
                .iter()
                .zip(&w)
                .map(|(ab, wb)| sym(&(wb * ab * wb)))
                .collect();
            for j in 0..k {
                m[(j, l)] = pair(&data.rows[j], &t);
            }
        }
        let m = sym(&m);
        let chol = {
            let mut ridge = 0.0f64;
            loop {
                let trial = if ridge == 0.0 {
                    m.clone()
                } else {
                    &m + DMatrix::identity(k, k) * ridge
                };
                match nalgebra::Cholesky::new(trial) {
                    Some(c) => break Some(c),
                    None => {
                        let base = m.diagonal().amax().max(1.0);
                        ridge = if ridge == 0.0 { 1e-14 * base } else { ridge * 100.0 };
                        if ridge > 1e-2 * base {
                            break None;
                        }
                    }
                }
            }
        };
        let Some(chol) = chol else {
            break; // hopelessly singular Schur complement
        };

        // W Rd W, and the A-pairings reused by both direction solves.
        let wrdw: Vec<DMatrix<f64>> = rd
            .iter()
            .zip(&w)
            .map(|(rb, wb)| sym(&(wb * rb * wb)))
            .collect();
        let a_x: Vec<f64> = (0..k).map(|j| pair(&data.rows[j], &x)).collect();
        let a_wrdw: Vec<f64> = (0..k).map(|j| pair(&data.rows[j], &wrdw)).collect();
        let a_zinv: Vec<f64> = (0..k).map(|j| pair(&data.rows[j], &zinv)).collect();

        let solve_direction = |sigma_mu: f64| {
            let rhs = nalgebra::DVector::from_fn(k, |j, _| {
                rp[j] + a_x[j] + a_wrdw[j] - sigma_mu * a_zinv[j]
            });
            let mut dy = chol.solve(&rhs);
            // One step of iterative refinement: the Schur complement gets
            // badly conditioned near the boundary and the raw solve loses
            // enough digits to stall the primal residual.
            let resid = &rhs - &m * &dy;
            dy += chol.solve(&resid);
            // dZ = Rd - A*(dy)
            let mut dz = rd.clone();
            for j in 0..k {
                add_scaled(&data.rows[j], -dy[j], &mut dz);
            }
            // dX = sigma*mu*Zinv - X - W dZ W
            let mut dx = Vec::with_capacity(x.len());
            for (i, (zb, xb)) in zinv.iter().zip(&x).enumerate() {
                let wdzw = sym(&(&w[i] * &dz[i] * &w[i]));
                dx.push(zb * sigma_mu - xb - wdzw);
            }
            (dx, dy, dz)
        };

        let step = |s: &[DMatrix<f64>], ds: &[DMatrix<f64>]| -> f64 {
            s.iter()
                .zip(ds)
                .map(|(sb, dsb)| max_psd_step(sb, dsb))
                .fold(f64::INFINITY, f64::min)
        };

        // Predictor: affine direction fixes the centering parameter.
        let (dx_aff, _, dz_aff) = solve_direction(0.0);
        let tau = 0.98;
        let ap_aff = (tau * step(&x, &dx_aff)).min(1.0);
        let ad_aff = (tau * step(&z, &dz_aff)).min(1.0);
        let mu_aff = {
            let xa: Vec<DMatrix<f64>> = x
                .iter()
                .zip(&dx_aff)
                .map(|(a, d)| a + d * ap_aff)
                .collect();
            let za: Vec<DMatrix<f64>> = z
                .iter()
                .zip(&dz_aff)
                .map(|(a, d)| a + d * ad_aff)
                .collect();
            block_dot(&xa, &za) / nf
        };
        let sigma = (mu_aff / mu).powi(3).clamp(1e-4, 0.9);

        // Corrector with the chosen centering, same factorization.
        let (dx, dy, dz) = solve_direction(sigma * mu);
        let finite = dx.iter().chain(dz.iter()).all(|m| m.iter().all(|v| v.is_finite()))
            && dy.iter().all(|v| v.is_finite());
        if !finite {
            break; // numerically broken direction
        }
        let ap = (tau * step(&x, &dx)).min(1.0);
        let ad = (tau * step(&z, &dz)).min(1.0);
        if ap <= 1e-12 || ad <= 1e-12 {
            break; // no progress possible
        }
        for (xb, dxb) in x.iter_mut().zip(&dx) {
            *xb += dxb * ap;
            *xb = sym(xb);
        }
        for (j, dyj) in dy.iter().enumerate() {
            y[j] += ad * dyj;
        }
        for (zb, dzb) in z.iter_mut().zip(&dz) {
            *zb += dzb * ad;
            *zb = sym(zb);
        }
    }

    Ok(SdpSolution {
        primal_blocks: x,
        dual_y: y,
        dual_slack_blocks: z,
        primal_value: pobj,
        dual_value: dobj,
        duality_gap: pobj - dobj,
        primal_residual: pres,
        dual_residual: dres,
        iterations,
        status,
    })
}
