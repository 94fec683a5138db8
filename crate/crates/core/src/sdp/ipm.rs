//! Infeasible-start primal-dual path following with the HKM direction and
//! Mehrotra predictor-corrector.
//!
//! Free variables enter through the saddle-point system
//! `[[M, A_f], [A_f^T, 0]]`, reduced with the augmented Schur complement
//! `M + rho A_f A_f^T`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use super::dense::{
    self, cholesky, cholesky_inverse, cholesky_solve, congruence_inverse, sym_eigenvalues,
};
use super::{
    BlockKind, BlockValue, IterationRecord, SdpProblem, SdpSolution, SolveOptions, SolveStatus, Var,
};
use crate::Result;

#[derive(Clone, Copy, Debug)]
struct Entry {
    a: usize,
    b: usize,
    w: f64,
}

struct PsdData {
    n: usize,
    c: Vec<f64>,
    /// Per constraint, merged upper-triangle entries.
    rows: Vec<Vec<Entry>>,
}

#[derive(Clone, Copy)]
enum Slot {
    Psd(usize),
    Lp(usize),
}

struct Prepared {
    psd: Vec<PsdData>,
    slots: Vec<Slot>,
    lp_size: usize,
    free: usize,
    m: usize,
    c_lp: Vec<f64>,
    c_free: Vec<f64>,
    lp_rows: Vec<Vec<(usize, f64)>>,
    lp_cols: Vec<Vec<(usize, f64)>>,
    free_rows: Vec<Vec<(usize, f64)>>,
    free_cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
}

fn merge(mut v: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    v.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(v.len());
    for (k, w) in v {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += w,
            _ => out.push((k, w)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}

impl Prepared {
    fn new(p: &SdpProblem) -> Self {
        let mut slots = Vec::with_capacity(p.blocks.len());
        let mut psd = Vec::new();
        let mut lp_size = 0;
        for b in &p.blocks {
            match b.kind {
                BlockKind::Psd => {
                    slots.push(Slot::Psd(psd.len()));
                    psd.push(PsdData {
                        n: b.size,
                        c: vec![0.0; b.size * b.size],
                        rows: Vec::new(),
                    });
                }
                BlockKind::Nonneg => {
                    slots.push(Slot::Lp(lp_size));
                    lp_size += b.size;
                }
            }
        }
        let m = p.constraints.len();
        let free = p.free_count;

        // objective
        let mut c_lp = vec![0.0; lp_size];
        let mut c_free = vec![0.0; free];
        for &(v, w) in &p.objective {
            match v {
                Var::Psd { block, row, col } => {
                    let Slot::Psd(k) = slots[block] else {
                        unreachable!("validated")
                    };
                    let d = &mut psd[k];
                    if row == col {
                        d.c[row * d.n + row] += w;
                    } else {
                        d.c[row * d.n + col] += 0.5 * w;
                        d.c[col * d.n + row] += 0.5 * w;
                    }
                }
                Var::Nonneg { block, index } => {
                    let Slot::Lp(off) = slots[block] else {
                        unreachable!("validated")
                    };
                    c_lp[off + index] += w;
                }
                Var::Free(k) => c_free[k] += w,
            }
        }

        let mut lp_rows = Vec::with_capacity(m);
        let mut free_rows = Vec::with_capacity(m);
        for d in psd.iter_mut() {
            d.rows = Vec::with_capacity(m);
        }
        for con in &p.constraints {
            let mut per_block: Vec<Vec<(usize, f64)>> = vec![Vec::new(); psd.len()];
            let mut lp = Vec::new();
            let mut fr = Vec::new();
            for &(v, w) in &con.terms {
                match v {
                    Var::Psd { block, row, col } => {
                        let Slot::Psd(k) = slots[block] else {
                            unreachable!("validated")
                        };
                        let (a, b) = (row.min(col), row.max(col));
                        per_block[k].push((a * psd[k].n + b, w));
                    }
                    Var::Nonneg { block, index } => {
                        let Slot::Lp(off) = slots[block] else {
                            unreachable!("validated")
                        };
                        lp.push((off + index, w));
                    }
                    Var::Free(k) => fr.push((k, w)),
                }
            }
            for (k, entries) in per_block.into_iter().enumerate() {
                let n = psd[k].n;
                let merged = merge(entries)
                    .into_iter()
                    .map(|(ab, w)| Entry {
                        a: ab / n,
                        b: ab % n,
                        w,
                    })
                    .collect();
                psd[k].rows.push(merged);
            }
            lp_rows.push(merge(lp));
            free_rows.push(merge(fr));
        }
        let mut lp_cols = vec![Vec::new(); lp_size];
        let mut free_cols = vec![Vec::new(); free];
        for i in 0..m {
            for &(k, w) in &lp_rows[i] {
                lp_cols[k].push((i, w));
            }
            for &(k, w) in &free_rows[i] {
                free_cols[k].push((i, w));
            }
        }
        let b = p.constraints.iter().map(|c| c.rhs).collect();
        Self {
            psd,
            slots,
            lp_size,
            free,
            m,
            c_lp,
            c_free,
            lp_rows,
            lp_cols,
            free_rows,
            free_cols,
            b,
        }
    }

    /// `A(X, x, x_f)`.
    fn apply_a(&self, xs: &[Vec<f64>], x: &[f64], xf: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (d, xm) in self.psd.iter().zip(xs) {
            for (o, row) in out.iter_mut().zip(&d.rows) {
                *o += row.iter().map(|e| e.w * xm[e.a * d.n + e.b]).sum::<f64>();
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.lp_rows[i].iter().map(|&(k, w)| w * x[k]).sum::<f64>();
            *o += self.free_rows[i]
                .iter()
                .map(|&(k, w)| w * xf[k])
                .sum::<f64>();
        }
        out
    }

    /// `A^T y`, split by block kind.
    fn apply_at(&self, y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let mut s: Vec<Vec<f64>> = self.psd.iter().map(|d| vec![0.0; d.n * d.n]).collect();
        for (d, sm) in self.psd.iter().zip(s.iter_mut()) {
            for (yi, row) in y.iter().zip(&d.rows) {
                for e in row {
                    if e.a == e.b {
                        sm[e.a * d.n + e.a] += yi * e.w;
                    } else {
                        let h = 0.5 * yi * e.w;
                        sm[e.a * d.n + e.b] += h;
                        sm[e.b * d.n + e.a] += h;
                    }
                }
            }
        }
        let lp = self
            .lp_cols
            .iter()
            .map(|col| col.iter().map(|&(i, w)| w * y[i]).sum())
            .collect();
        let fr = self
            .free_cols
            .iter()
            .map(|col| col.iter().map(|&(i, w)| w * y[i]).sum())
            .collect();
        (s, lp, fr)
    }

    fn c_norm(&self) -> f64 {
        let psd: f64 = self
            .psd
            .iter()
            .map(|d| d.c.iter().map(|x| x * x).sum::<f64>())
            .sum();
        let lp: f64 = self.c_lp.iter().map(|x| x * x).sum();
        let fr: f64 = self.c_free.iter().map(|x| x * x).sum();
        (psd + lp + fr).sqrt()
    }

    /// Frobenius norm of `A_i` restricted to PSD block `k`.
    fn a_norm(&self, k: usize, i: usize) -> f64 {
        self.psd[k].rows[i]
            .iter()
            .map(|e| {
                if e.a == e.b {
                    e.w * e.w
                } else {
                    0.5 * e.w * e.w
                }
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `(P + P^T) / 2` for `P = a b c`.
fn sym_triple(a: &[f64], b: &[f64], c: &[f64], n: usize) -> Vec<f64> {
    let mut p = dense::matmul(&dense::matmul(a, b, n), c, n);
    dense::symmetrize(&mut p, n);
    p
}

/// Largest `alpha` with `X + alpha dX >= 0` given the Cholesky factor of `X`.
fn psd_step(l: &[f64], dx: &[f64], n: usize) -> Option<f64> {
    let t = congruence_inverse(l, n, dx);
    let w = sym_eigenvalues(&t, n)?;
    let lo = w.first().copied().unwrap_or(0.0);
    Some(if lo < 0.0 { -1.0 / lo } else { f64::INFINITY })
}

fn lp_step(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&x, &d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

struct Direction {
    dx: Vec<Vec<f64>>,
    dz: Vec<Vec<f64>>,
    dx_lp: Vec<f64>,
    dz_lp: Vec<f64>,
    dxf: Vec<f64>,
    dy: Vec<f64>,
}

/// Factorized Newton system of one iteration.
struct Newton<'a> {
    p: &'a Prepared,
    x: &'a [Vec<f64>],
    x_lp: &'a [f64],
    z_lp: &'a [f64],
    zinv: Vec<Vec<f64>>,
    rp: &'a [f64],
    rd: &'a [Vec<f64>],
    rd_lp: &'a [f64],
    rf: &'a [f64],
    chol_m: Vec<f64>,
    rho: f64,
    /// `M'^{-1} A_f`, column-major by free variable.
    k: Vec<Vec<f64>>,
    chol_s: Vec<f64>,
}

impl Newton<'_> {
    fn solve(&self, g: &[Vec<f64>], g_lp: &[f64]) -> Direction {
        let p = self.p;
        let m = p.m;
        let t: Vec<Vec<f64>> = p
            .psd
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let corr = sym_triple(&self.x[k], &self.rd[k], &self.zinv[k], d.n);
                g[k].iter().zip(&corr).map(|(a, b)| a - b).collect()
            })
            .collect();
        let t_lp: Vec<f64> = (0..p.lp_size)
            .map(|k| g_lp[k] - self.x_lp[k] / self.z_lp[k] * self.rd_lp[k])
            .collect();
        let at = p.apply_a(&t, &t_lp, &vec![0.0; p.free]);
        let mut h: Vec<f64> = self.rp.iter().zip(&at).map(|(a, b)| a - b).collect();

        let (dy, dxf) = if p.free == 0 {
            cholesky_solve(&self.chol_m, m, &mut h);
            (h, Vec::new())
        } else {
            for (col, &r) in p.free_cols.iter().zip(self.rf) {
                for &(i, w) in col {
                    h[i] += self.rho * w * r;
                }
            }
            let mut u = h;
            cholesky_solve(&self.chol_m, m, &mut u);
            let mut dxf: Vec<f64> = p
                .free_cols
                .iter()
                .zip(self.rf)
                .map(|(col, &r)| col.iter().map(|&(i, w)| w * u[i]).sum::<f64>() - r)
                .collect();
            cholesky_solve(&self.chol_s, p.free, &mut dxf);
            for (kcol, &d) in self.k.iter().zip(&dxf) {
                for (ui, &ki) in u.iter_mut().zip(kcol) {
                    *ui -= ki * d;
                }
            }
            (u, dxf)
        };

        let (s, s_lp, _) = p.apply_at(&dy);
        let mut dz = Vec::with_capacity(p.psd.len());
        let mut dx = Vec::with_capacity(p.psd.len());
        for (k, d) in p.psd.iter().enumerate() {
            let dzk: Vec<f64> = self.rd[k].iter().zip(&s[k]).map(|(a, b)| a - b).collect();
            let corr = sym_triple(&self.x[k], &dzk, &self.zinv[k], d.n);
            dx.push(g[k].iter().zip(&corr).map(|(a, b)| a - b).collect());
            dz.push(dzk);
        }
        let dz_lp: Vec<f64> = self.rd_lp.iter().zip(&s_lp).map(|(a, b)| a - b).collect();
        let dx_lp = (0..p.lp_size)
            .map(|k| g_lp[k] - self.x_lp[k] / self.z_lp[k] * dz_lp[k])
            .collect();
        Direction {
            dx,
            dz,
            dx_lp,
            dz_lp,
            dxf,
            dy,
        }
    }
}

/// Cholesky with diagonal perturbation retries.
fn robust_cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let max_diag = (0..n)
        .map(|i| a[i * n + i].abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut delta = 0.0;
    for attempt in 0..6 {
        let mut l = a.to_vec();
        if delta > 0.0 {
            for i in 0..n {
                l[i * n + i] += delta;
            }
        }
        if cholesky(&mut l, n).is_ok() {
            return Some(l);
        }
        delta = max_diag * 1e-14 * 100f64.powi(attempt);
    }
    None
}

struct Iterate {
    x: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    x_lp: Vec<f64>,
    z_lp: Vec<f64>,
    xf: Vec<f64>,
    y: Vec<f64>,
}

/// Solves the problem; malformed or over-cap problems are rejected, all other
/// outcomes are reported through [`SolveStatus`].
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let p = Prepared::new(problem);
    let m = p.m;
    let b_norm = norm2(&p.b);
    let c_norm = p.c_norm();
    let barrier_dim = p.psd.iter().map(|d| d.n).sum::<usize>() + p.lp_size;

    // scaled-identity infeasible start
    let mut it = Iterate {
        x: Vec::new(),
        z: Vec::new(),
        x_lp: Vec::new(),
        z_lp: Vec::new(),
        xf: vec![0.0; p.free],
        y: vec![0.0; m],
    };
    for (k, d) in p.psd.iter().enumerate() {
        let n = d.n as f64;
        let mut xi = 10f64.max(n.sqrt());
        let mut eta = 10f64
            .max(n.sqrt())
            .max(d.c.iter().map(|x| x * x).sum::<f64>().sqrt());
        for i in 0..m {
            let an = p.a_norm(k, i);
            if an > 0.0 {
                xi = xi.max(n * (1.0 + p.b[i].abs()) / (1.0 + an));
                eta = eta.max(an);
            }
        }
        let mut xm = vec![0.0; d.n * d.n];
        let mut zm = vec![0.0; d.n * d.n];
        for i in 0..d.n {
            xm[i * d.n + i] = xi;
            zm[i * d.n + i] = eta;
        }
        it.x.push(xm);
        it.z.push(zm);
    }
    if p.lp_size > 0 {
        let n = p.lp_size as f64;
        let mut xi = 10f64.max(n.sqrt());
        let mut eta = 10f64.max(n.sqrt()).max(norm2(&p.c_lp));
        for i in 0..m {
            let an = norm2(&p.lp_rows[i].iter().map(|e| e.1).collect::<Vec<_>>());
            if an > 0.0 {
                xi = xi.max(n * (1.0 + p.b[i].abs()) / (1.0 + an));
                eta = eta.max(an);
            }
        }
        it.x_lp = vec![xi; p.lp_size];
        it.z_lp = vec![eta; p.lp_size];
    }

    let mut trace = Vec::new();
    let status;
    let mut iterations = 0;
    let mut last_steps = (0.0, 0.0);
    let mut stalled = 0;
    let (mut pobj, mut dobj, mut pinf, mut dinf);

    loop {
        let ax = p.apply_a(&it.x, &it.x_lp, &it.xf);
        let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let (s, s_lp, s_f) = p.apply_at(&it.y);
        let rd: Vec<Vec<f64>> = (0..p.psd.len())
            .map(|k| {
                p.psd[k]
                    .c
                    .iter()
                    .zip(&s[k])
                    .zip(&it.z[k])
                    .map(|((c, s), z)| c - s - z)
                    .collect()
            })
            .collect();
        let rd_lp: Vec<f64> = (0..p.lp_size)
            .map(|k| p.c_lp[k] - s_lp[k] - it.z_lp[k])
            .collect();
        let rf: Vec<f64> = (0..p.free).map(|k| p.c_free[k] - s_f[k]).collect();

        pobj = p
            .psd
            .iter()
            .zip(&it.x)
            .map(|(d, x)| dense::dot(&d.c, x))
            .sum::<f64>()
            + dense::dot(&p.c_lp, &it.x_lp)
            + dense::dot(&p.c_free, &it.xf);
        dobj = dense::dot(&p.b, &it.y);
        let rd_sq: f64 = rd
            .iter()
            .map(|r| r.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            + rd_lp.iter().map(|x| x * x).sum::<f64>()
            + rf.iter().map(|x| x * x).sum::<f64>();
        pinf = norm2(&rp) / (1.0 + b_norm);
        dinf = rd_sq.sqrt() / (1.0 + c_norm);
        let xz =
            it.x.iter()
                .zip(&it.z)
                .map(|(x, z)| dense::dot(x, z))
                .sum::<f64>()
                + dense::dot(&it.x_lp, &it.z_lp);
        let mu = if barrier_dim > 0 {
            xz / barrier_dim as f64
        } else {
            0.0
        };
        trace.push(IterationRecord {
            primal_objective: pobj,
            dual_objective: dobj,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            mu,
            primal_step: last_steps.0,
            dual_step: last_steps.1,
        });

        if !(pobj.is_finite() && dobj.is_finite() && pinf.is_finite() && dinf.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        let scale = 1.0 + pobj.abs();
        if pinf <= opts.feas_tol
            && dinf <= opts.feas_tol
            && (pobj - dobj).abs() <= opts.gap_tol * scale
            && xz <= opts.gap_tol * scale
        {
            status = SolveStatus::Optimal;
            break;
        }
        // improving rays: dual (primal infeasible) or primal (dual infeasible)
        let aty_z = (s
            .iter()
            .zip(&it.z)
            .map(|(a, z)| a.iter().zip(z).map(|(a, z)| (a + z) * (a + z)).sum::<f64>())
            .sum::<f64>()
            + s_lp
                .iter()
                .zip(&it.z_lp)
                .map(|(a, z)| (a + z) * (a + z))
                .sum::<f64>()
            + s_f.iter().map(|a| a * a).sum::<f64>())
        .sqrt();
        if pinf > opts.feas_tol && dobj > 0.0 && aty_z <= 1e-8 * dobj {
            status = SolveStatus::Infeasible;
            break;
        }
        if dinf > opts.feas_tol && pobj < 0.0 && norm2(&ax) <= 1e-8 * -pobj {
            status = SolveStatus::Infeasible;
            break;
        }
        if pobj.abs().max(dobj.abs()) > 1e12 * (1.0 + b_norm + c_norm) {
            status = SolveStatus::Infeasible;
            break;
        }
        if iterations >= opts.max_iter {
            status = SolveStatus::IterationLimit;
            break;
        }

        // factorizations
        let mut chol_x = Vec::with_capacity(p.psd.len());
        let mut zinv = Vec::with_capacity(p.psd.len());
        let mut failed = false;
        for (k, d) in p.psd.iter().enumerate() {
            let mut lx = it.x[k].clone();
            let mut lz = it.z[k].clone();
            if cholesky(&mut lx, d.n).is_err() || cholesky(&mut lz, d.n).is_err() {
                failed = true;
                break;
            }
            zinv.push(cholesky_inverse(&lz, d.n));
            chol_x.push(lx);
        }
        if failed {
            status = SolveStatus::NumericalFailure;
            break;
        }

        // Schur complement M_ij = tr(A_i X A_j Z^{-1}) + sum_k a_ik a_jk x_k / z_k
        let mut schur = vec![0.0; m * m];
        for (k, d) in p.psd.iter().enumerate() {
            let n = d.n;
            let (x, zi) = (&it.x[k], &zinv[k]);
            let mut bm = vec![0.0; n * n];
            for i in 0..m {
                let row_i = &d.rows[i];
                if row_i.is_empty() {
                    continue;
                }
                bm.iter_mut().for_each(|v| *v = 0.0);
                // B = X A_i Z^{-1}
                for e in row_i {
                    let h = 0.5 * e.w;
                    for (u, v) in [(e.a, e.b), (e.b, e.a)] {
                        let zrow = &zi[v * n..v * n + n];
                        for r in 0..n {
                            let f = h * x[u * n + r];
                            if f == 0.0 {
                                continue;
                            }
                            let brow = &mut bm[r * n..r * n + n];
                            for (bv, &zv) in brow.iter_mut().zip(zrow) {
                                *bv += f * zv;
                            }
                        }
                    }
                }
                let out = &mut schur[i * m..i * m + m];
                for j in i..m {
                    let s: f64 = d.rows[j]
                        .iter()
                        .map(|e| 0.5 * e.w * (bm[e.a * n + e.b] + bm[e.b * n + e.a]))
                        .sum();
                    out[j] += s;
                }
            }
        }
        for (k, col) in p.lp_cols.iter().enumerate() {
            let dk = it.x_lp[k] / it.z_lp[k];
            for (a, &(i, wi)) in col.iter().enumerate() {
                let f = wi * dk;
                for &(j, wj) in &col[a..] {
                    schur[i * m + j] += f * wj;
                }
            }
        }
        let mut rho = 0.0;
        if p.free > 0 {
            let max_m = (0..m).map(|i| schur[i * m + i]).fold(0.0, f64::max);
            let mut aa_diag = vec![0.0; m];
            for col in &p.free_cols {
                for &(i, w) in col {
                    aa_diag[i] += w * w;
                }
            }
            let max_aa = aa_diag.iter().copied().fold(0.0, f64::max);
            rho = if max_aa > 0.0 {
                max_m.max(1.0) / max_aa
            } else {
                0.0
            };
            for col in &p.free_cols {
                for (a, &(i, wi)) in col.iter().enumerate() {
                    for &(j, wj) in &col[a..] {
                        let (lo, hi) = (i.min(j), i.max(j));
                        schur[lo * m + hi] += rho * wi * wj;
                    }
                }
            }
        }
        // mirror the upper triangle into the lower one read by the factorization
        for i in 0..m {
            for j in i + 1..m {
                schur[j * m + i] = schur[i * m + j];
            }
        }
        let Some(chol_m) = robust_cholesky(&schur, m) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        drop(schur);

        let mut kcols = Vec::new();
        let mut chol_s = Vec::new();
        if p.free > 0 {
            for col in &p.free_cols {
                let mut v = vec![0.0; m];
                for &(i, w) in col {
                    v[i] = w;
                }
                cholesky_solve(&chol_m, m, &mut v);
                kcols.push(v);
            }
            let nf = p.free;
            let mut sm = vec![0.0; nf * nf];
            for a in 0..nf {
                for bcol in 0..nf {
                    sm[a * nf + bcol] = p.free_cols[a]
                        .iter()
                        .map(|&(i, w)| w * kcols[bcol][i])
                        .sum();
                }
            }
            dense::symmetrize(&mut sm, nf);
            match robust_cholesky(&sm, nf) {
                Some(l) => chol_s = l,
                None => {
                    status = SolveStatus::NumericalFailure;
                    break;
                }
            }
        }

        let newton = Newton {
            p: &p,
            x: &it.x,
            x_lp: &it.x_lp,
            z_lp: &it.z_lp,
            zinv,
            rp: &rp,
            rd: &rd,
            rd_lp: &rd_lp,
            rf: &rf,
            chol_m,
            rho,
            k: kcols,
            chol_s,
        };

        let step_lengths = |dir: &Direction| -> Option<(f64, f64)> {
            let mut ap = lp_step(&it.x_lp, &dir.dx_lp);
            let mut ad = lp_step(&it.z_lp, &dir.dz_lp);
            for (k, d) in p.psd.iter().enumerate() {
                ap = ap.min(psd_step(&chol_x[k], &dir.dx[k], d.n)?);
                let mut lz = it.z[k].clone();
                cholesky(&mut lz, d.n).ok()?;
                ad = ad.min(psd_step(&lz, &dir.dz[k], d.n)?);
            }
            Some((ap, ad))
        };

        // predictor
        let g: Vec<Vec<f64>> =
            it.x.iter()
                .map(|x| x.iter().map(|v| -v).collect())
                .collect();
        let g_lp: Vec<f64> = it.x_lp.iter().map(|v| -v).collect();
        let aff = newton.solve(&g, &g_lp);
        let Some((ap_aff, ad_aff)) = step_lengths(&aff) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let (ap_aff, ad_aff) = (ap_aff.min(1.0), ad_aff.min(1.0));
        let mut xz_aff = 0.0;
        for k in 0..p.psd.len() {
            for idx in 0..it.x[k].len() {
                xz_aff += (it.x[k][idx] + ap_aff * aff.dx[k][idx])
                    * (it.z[k][idx] + ad_aff * aff.dz[k][idx]);
            }
        }
        for k in 0..p.lp_size {
            xz_aff += (it.x_lp[k] + ap_aff * aff.dx_lp[k]) * (it.z_lp[k] + ad_aff * aff.dz_lp[k]);
        }
        let sigma = if xz > 0.0 {
            (xz_aff / xz).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };
        let target = sigma * mu;

        // corrector
        let g: Vec<Vec<f64>> = p
            .psd
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let n = d.n;
                let second = sym_triple(&aff.dx[k], &aff.dz[k], &newton.zinv[k], n);
                (0..n * n)
                    .map(|idx| target * newton.zinv[k][idx] - it.x[k][idx] - second[idx])
                    .collect()
            })
            .collect();
        let g_lp: Vec<f64> = (0..p.lp_size)
            .map(|k| (target - aff.dx_lp[k] * aff.dz_lp[k]) / it.z_lp[k] - it.x_lp[k])
            .collect();
        let dir = newton.solve(&g, &g_lp);
        let Some((ap_max, ad_max)) = step_lengths(&dir) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let tau = 0.9 + 0.09 * ap_aff.min(ad_aff);
        let ap = (tau * ap_max).min(1.0);
        let ad = (tau * ad_max).min(1.0);

        for k in 0..p.psd.len() {
            for (x, d) in it.x[k].iter_mut().zip(&dir.dx[k]) {
                *x += ap * d;
            }
            for (z, d) in it.z[k].iter_mut().zip(&dir.dz[k]) {
                *z += ad * d;
            }
            dense::symmetrize(&mut it.x[k], p.psd[k].n);
            dense::symmetrize(&mut it.z[k], p.psd[k].n);
        }
        for (x, d) in it.x_lp.iter_mut().zip(&dir.dx_lp) {
            *x += ap * d;
        }
        for (z, d) in it.z_lp.iter_mut().zip(&dir.dz_lp) {
            *z += ad * d;
        }
        for (x, d) in it.xf.iter_mut().zip(&dir.dxf) {
            *x += ap * d;
        }
        for (y, d) in it.y.iter_mut().zip(&dir.dy) {
            *y += ad * d;
        }
        iterations += 1;
        last_steps = (ap, ad);
        if ap < 1e-10 && ad < 1e-10 {
            stalled += 1;
            if stalled >= 3 {
                status = SolveStatus::NumericalFailure;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    let mut primal_blocks = Vec::with_capacity(problem.blocks.len());
    let mut dual_slack = Vec::with_capacity(problem.blocks.len());
    for (blk, slot) in problem.blocks.iter().zip(&p.slots) {
        match *slot {
            Slot::Psd(k) => {
                primal_blocks.push(BlockValue::Psd {
                    size: blk.size,
                    data: it.x[k].clone(),
                });
                dual_slack.push(BlockValue::Psd {
                    size: blk.size,
                    data: it.z[k].clone(),
                });
            }
            Slot::Lp(off) => {
                primal_blocks.push(BlockValue::Nonneg(it.x_lp[off..off + blk.size].to_vec()));
                dual_slack.push(BlockValue::Nonneg(it.z_lp[off..off + blk.size].to_vec()));
            }
        }
    }
    Ok(SdpSolution {
        status,
        primal_objective: pobj,
        dual_objective: dobj,
        gap: (pobj - dobj).abs(),
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        iterations,
        primal_blocks,
        free: it.xf,
        dual: it.y,
        dual_slack,
        trace,
    })
}
