//! The individual randomized checks run by the suite. Each returns one
//! residual per declared check; a check fails when its residual exceeds the
//! tolerance.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::gen::{
    gen_nested, gen_pair, gen_psd, gen_subspace, random_unit, rng_from_seed, with_spectrum, SpectrumKind, SpectrumSpec,
};
use super::suite::ControlReport;
use crate::error::{Error, Result};
use crate::kolmogorov::{kolmogorov_characterizations, kolmogorov_closed, kolmogorov_duality, kolmogorov_power, DEFAULT_N_MAX};
use crate::linalg::{eig_sym, matrix_function, matrix_power, projection_meet, pseudo_inverse, Subspace, SymMatrix};
use crate::order::spectral_leq;
use crate::shorted::{short_at, short_schur};
use crate::spectral_short::{
    inverse_power_identity, min_spectrum_rho, monotone_calculus_check, rho_spectrum_set, rho_vector, rho_vector_power,
    spectral_short_closed, spectral_short_iterative, DEFAULT_K_MAX, DEFAULT_M_MAX,
};
use crate::tol::Tolerances;

use SpectrumKind::*;

pub(crate) struct Property {
    pub id: &'static str,
    pub title: &'static str,
    /// `(name, tolerance)` pairs, in the order `run` reports residuals.
    pub checks: &'static [(&'static str, f64)],
    /// Whether failures count against the suite verdict. Non-gating
    /// properties are still run and reported.
    pub gating: bool,
    pub run: fn(&mut Ctx) -> Result<Vec<f64>>,
}

pub(crate) struct Ctx {
    n: usize,
    rng: ChaCha8Rng,
    tol: Tolerances,
}

const ANY: &[SpectrumKind] = &[WellSeparated, Clustered, WithZeros, Projection];
const SEPARATED: &[SpectrumKind] = &[WellSeparated];
const INVERTIBLE: &[SpectrumKind] = &[WellSeparated, Clustered];

impl Ctx {
    pub fn new(n: usize, seed: u64, tol: Tolerances) -> Self {
        Ctx { n, rng: rng_from_seed(seed), tol }
    }

    fn seed(&mut self) -> u64 {
        self.rng.random()
    }

    fn psd(&mut self, kinds: &[SpectrumKind]) -> Result<SymMatrix> {
        let mut kind = kinds[self.rng.random_range(0..kinds.len())];
        if kind == WithZeros && self.n < 2 {
            kind = WellSeparated;
        }
        let seed = self.seed();
        gen_psd(&SpectrumSpec::new(kind, self.n), seed)
    }

    fn pair(&mut self) -> Result<(SymMatrix, SymMatrix)> {
        let seed = self.seed();
        gen_pair(&SpectrumSpec::new(CommutingPair, self.n), seed)
    }

    fn subspace(&mut self, lo: usize) -> Result<Subspace> {
        let k = self.rng.random_range(lo.min(self.n)..=self.n);
        let seed = self.seed();
        gen_subspace(self.n, k, seed)
    }

    /// Two subspaces with dimensions in `[n/2, n]`, so their intersection is
    /// often nonzero.
    fn two_subspaces(&mut self) -> Result<(Subspace, Subspace)> {
        let lo = self.n / 2;
        Ok((self.subspace(lo)?, self.subspace(lo)?))
    }

    fn nested(&mut self) -> Result<(Subspace, Subspace)> {
        let big = self.rng.random_range(1..=self.n);
        let small = self.rng.random_range(0..=big);
        let seed = self.seed();
        gen_nested(self.n, small, big, seed)
    }

    fn unit(&mut self) -> DVector<f64> {
        random_unit(self.n, &mut self.rng)
    }

    fn unit_in(&mut self, s: &Subspace) -> DVector<f64> {
        let g = random_unit(s.dim(), &mut self.rng);
        s.basis() * g
    }
}

impl Ctx {
    /// Draws instances until `accept` holds. Rejected draws still advance the
    /// generator, so the result depends only on the trial seed.
    fn draw_until<T>(
        &mut self,
        draw: impl Fn(&mut Ctx) -> Result<T>,
        accept: impl Fn(&T, &Tolerances) -> Result<bool>,
    ) -> Result<T> {
        for _ in 0..MAX_REDRAWS {
            let x = draw(self)?;
            if accept(&x, &self.tol)? {
                return Ok(x);
            }
        }
        Err(Error::Domain(format!("no well-posed instance in {MAX_REDRAWS} draws")))
    }
}

const MAX_REDRAWS: usize = 50;

/// True when some direction is nearly, but not numerically, common to `p`
/// and `q`: an eigenvalue of `P + Q` lies in a band below 2 around the meet
/// threshold. Such instances flip between meet dimensions under roundoff.
fn ambiguous(p: &Subspace, q: &Subspace, tol: &Tolerances) -> Result<bool> {
    if p.is_zero() || q.is_zero() {
        return Ok(false);
    }
    let (lo, hi) = (1e-3 * tol.meet_tol, 1e4 * tol.meet_tol);
    Ok(p.projection().add(&q.projection()).eigenvalues().iter().any(|x| (lo..hi).contains(&(2.0 - x))))
}

/// Whether every meet the spectral constructions take for `a` and the given
/// subspaces (and for pairwise intersections of them) is well separated from
/// the meet threshold.
fn clear_meets(a: &SymMatrix, subspaces: &[&Subspace], tol: &Tolerances) -> Result<bool> {
    let d = eig_sym(a, tol)?;
    let n = a.n();
    let spectral: Vec<Subspace> = d.positive_levels(tol).iter().map(|l| d.span(l.start..n)).collect();
    for s in subspaces {
        for q in &spectral {
            if ambiguous(q, s, tol)? {
                return Ok(false);
            }
        }
    }
    for (i, s) in subspaces.iter().enumerate() {
        for t in &subspaces[i + 1..] {
            if ambiguous(s, t, tol)? {
                return Ok(false);
            }
            let st = projection_meet(s, t, tol)?;
            for q in &spectral {
                if ambiguous(q, &st, tol)? || ambiguous(&projection_meet(q, s, tol)?, t, tol)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

fn rel(x: f64, scale: f64) -> f64 {
    x / scale.max(f64::MIN_POSITIVE)
}

/// How far `lo ≤ hi` is from holding, relative to `scale`.
fn loewner_gap(lo: &SymMatrix, hi: &SymMatrix, scale: f64) -> f64 {
    rel((-hi.sub(lo).min_eigenvalue()).max(0.0), scale)
}

fn positive_levels(a: &SymMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    let d = eig_sym(a, tol)?;
    Ok(d.positive_levels(tol).iter().map(|l| l.value).collect())
}

/// A threshold between two consecutive entries of `values ∪ {0}`, after
/// merging entries closer than `width`.
fn midpoint_threshold<R: Rng>(values: &[f64], width: f64, rng: &mut R) -> f64 {
    let mut v: Vec<f64> = std::iter::once(0.0).chain(values.iter().copied()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|b, a| *b - *a <= width);
    if v.len() < 2 {
        return 0.5;
    }
    let i = rng.random_range(0..v.len() - 1);
    0.5 * (v[i] + v[i + 1])
}

fn t1(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(ANY)?;
    let s = c.subspace(0)?;
    let at = short_at(&a, &s, &c.tol)?;
    let schur = short_schur(&a, &s, &c.tol)?;
    Ok(vec![rel(at.value.max_abs_diff(&schur.value), a.norm2())])
}

fn t2(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(ANY)?;
    let (s, t) = c.draw_until(|c| c.two_subspaces(), |(s, t), tol| Ok(!ambiguous(s, t, tol)?))?;
    let lhs = short_at(&a, &projection_meet(&s, &t, &c.tol)?, &c.tol)?.value;
    let rhs = short_at(&short_at(&a, &t, &c.tol)?.value, &s, &c.tol)?.value;
    Ok(vec![rel(lhs.max_abs_diff(&rhs), a.norm2())])
}

fn t3(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, s) = c.draw_until(|c| Ok((c.psd(SEPARATED)?, c.subspace(1)?)), |(a, s), tol| clear_meets(a, &[s], tol))?;
    let closed = spectral_short_closed(&a, &s, &c.tol)?;
    let it = spectral_short_iterative(&a, &s, DEFAULT_K_MAX, &c.tol)?;
    let trace = it.trace.as_ref().expect("iterative result carries a trace");
    Ok(vec![rel(it.value.max_abs_diff(&closed.value), a.norm2()), trace.psd_monotonicity_violation(), flag(trace.converged)])
}

fn t4(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, s) = c.draw_until(|c| Ok((c.psd(ANY)?, c.subspace(0)?)), |(a, s), tol| clear_meets(a, &[s], tol))?;
    let norm = a.norm2();
    let rho = spectral_short_closed(&a, &s, &c.tol)?.value;
    [0.5, 2.0, 3.0]
        .iter()
        .map(|&t| {
            let lhs = spectral_short_closed(&matrix_power(&a, t, &c.tol)?, &s, &c.tol)?.value;
            let rhs = matrix_power(&rho, t, &c.tol)?;
            Ok(rel(lhs.max_abs_diff(&rhs), norm.powf(t).max(1.0)))
        })
        .collect()
}

fn t5(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, (s, t)) = c.draw_until(|c| Ok((c.psd(ANY)?, c.two_subspaces()?)), |(a, (s, t)), tol| clear_meets(a, &[s, t], tol))?;
    let lhs = spectral_short_closed(&a, &projection_meet(&s, &t, &c.tol)?, &c.tol)?.value;
    let rhs = spectral_short_closed(&spectral_short_closed(&a, &s, &c.tol)?.value, &t, &c.tol)?.value;
    Ok(vec![rel(lhs.max_abs_diff(&rhs), a.norm2())])
}

fn t6(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, s) = c.draw_until(|c| Ok((c.psd(ANY)?, c.subspace(1)?)), |(a, s), tol| clear_meets(a, &[s], tol))?;
    let mut grid = positive_levels(&a, &c.tol)?;
    grid.push(0.0);
    let rho = spectral_short_closed(&a, &s, &c.tol)?;
    let eigs = rho.on_subspace(&s).eigenvalues();
    let worst = eigs.iter().map(|e| grid.iter().map(|g| (e - g).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    Ok(vec![worst])
}

fn t7(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, s) = c.draw_until(|c| Ok((c.psd(ANY)?, c.subspace(1)?)), |(a, s), tol| clear_meets(a, &[s], tol))?;
    let grid_value = min_spectrum_rho(&a, &s, &c.tol)?;
    let rho = spectral_short_closed(&a, &s, &c.tol)?;
    let e = rho.on_subspace(&s).min_eigenvalue();
    let mut candidates = positive_levels(&a, &c.tol)?;
    candidates.push(0.0);
    let snapped = candidates.iter().copied().min_by(|x, y| (x - e).abs().total_cmp(&(y - e).abs())).unwrap_or(0.0);
    let grid_residual = if snapped == grid_value { 0.0 } else { (grid_value - e).abs().max(f64::MIN_POSITIVE) };
    let lambda_min = eig_sym(&a, &c.tol)?.lambda_min().max(0.0);
    let bound = (-rho.value.sub(&s.projection().scale(lambda_min)).min_eigenvalue()).max(0.0);
    Ok(vec![grid_residual, bound])
}

fn t8(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, s) = c.draw_until(|c| Ok((c.psd(ANY)?, c.subspace(0)?)), |(a, s), tol| clear_meets(a, &[s], tol))?;
    let levels = positive_levels(&a, &c.tol)?;
    let top = levels.last().copied().unwrap_or(0.0);
    let threshold = midpoint_threshold(&levels, c.tol.cluster_abs(top), &mut c.rng);
    let step = move |t: f64| if t >= threshold { 1.0 } else { 0.0 };
    Ok(vec![
        monotone_calculus_check(&a, &s, |t| t * t, &c.tol)? / (top * top).max(1.0),
        monotone_calculus_check(&a, &s, f64::sqrt, &c.tol)? / top.sqrt().max(1.0),
        monotone_calculus_check(&a, &s, step, &c.tol)?,
    ])
}

fn t9(c: &mut Ctx) -> Result<Vec<f64>> {
    let values: Vec<f64> = (0..c.n).map(|_| c.rng.random_range(1.0..=2.0)).collect();
    let a = with_spectrum(&values, &mut c.rng);
    let xi = c.unit();
    let mut worst = 0.0f64;
    for m in 1..=8 {
        let (l, r) = inverse_power_identity(&a, &xi, m, &c.tol)?;
        worst = worst.max((l - r).abs());
    }
    Ok(vec![worst])
}

fn t10(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(&[WellSeparated, WithZeros])?;
    let d = eig_sym(&a, &c.tol)?;
    let first = d.positive_levels(&c.tol).first().map_or(c.n, |l| l.start);
    let range = d.span(first..c.n);
    let xi = c.unit_in(&range);
    let (value, _) = rho_vector_power(&a, &xi, DEFAULT_M_MAX, &c.tol)?;
    let limit = (value - rho_vector(&a, &xi, &c.tol)?).abs();

    let singular = if c.n < 2 { SymMatrix::zeros(c.n) } else { c.psd(&[WithZeros])? };
    let zeta = c.unit();
    let (outside, _) = rho_vector_power(&singular, &zeta, DEFAULT_M_MAX, &c.tol)?;
    Ok(vec![limit, outside.abs()])
}

fn known_violation() -> (SymMatrix, SymMatrix) {
    (
        SymMatrix::from_row_major(2, &[1.0, 1.0, 1.0, 1.0], 0.0).expect("symmetric literal"),
        SymMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 1.0], 0.0).expect("symmetric literal"),
    )
}

fn t11(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, b) = c.pair()?;
    let holds = spectral_leq(&a, &b, &c.tol)?.holds;
    let (x, y) = known_violation();
    let bad = spectral_leq(&x, &y, &c.tol)?;
    Ok(vec![flag(holds), flag(!bad.holds && bad.witness_lambda.is_some())])
}

fn t12(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, b) = c.pair()?;
    let d = eig_sym(&a, &c.tol)?;
    let mut worst = 0.0f64;
    for i in 0..100 {
        // Half of the vectors are supported on the top eigenvectors only, so
        // the comparison is not always between the two smallest eigenvalues.
        let xi = if i % 2 == 0 {
            c.unit()
        } else {
            let start = c.rng.random_range(0..c.n);
            let top = d.span(start..c.n);
            c.unit_in(&top)
        };
        worst = worst.max(rho_vector(&a, &xi, &c.tol)? - rho_vector(&b, &xi, &c.tol)?);
    }

    let x = c.psd(SEPARATED)?;
    let v = c.unit();
    let bump = SymMatrix::symmetrize(&v * v.transpose() * (0.5 * x.norm2()));
    let y = x.add(&bump);
    let witness_found = if spectral_leq(&x, &y, &c.tol)?.holds {
        true
    } else {
        let dx = eig_sym(&x, &c.tol)?;
        let mut found = false;
        for i in 0..c.n {
            let e = dx.eigenvector(i);
            if rho_vector(&x, &e, &c.tol)? > rho_vector(&y, &e, &c.tol)? {
                found = true;
                break;
            }
        }
        found
    };
    Ok(vec![worst.max(0.0), flag(witness_found)])
}

fn t13(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(&[WellSeparated, WithZeros])?;
    let xi = c.unit();
    let power = kolmogorov_power(&a, &xi, DEFAULT_N_MAX, &c.tol)?;
    let trace = power.trace.as_ref().expect("power result carries a trace");
    let estimate = trace.final_estimate().and_then(|v| v.as_scalar()).unwrap_or(f64::NAN);
    let closed = kolmogorov_closed(&a, &xi, &c.tol)?.value;

    let mut scaling = 0.0f64;
    for s in [-1.0, 0.5, 10.0] {
        scaling = scaling.max((kolmogorov_closed(&a, &(&xi * s), &c.tol)?.value - closed).abs());
    }

    let d = eig_sym(&a, &c.tol)?;
    let eligible: Vec<_> = d.positive_levels(&c.tol).into_iter().filter(|l| l.value <= closed).collect();
    let truncation = if eligible.is_empty() {
        0.0
    } else {
        let level = eligible[c.rng.random_range(0..eligible.len())];
        let q = d.span(level.start..c.n);
        let truncated = q.basis() * (q.basis().transpose() * &xi);
        if truncated.norm() > c.tol.orth_tol {
            (kolmogorov_closed(&a, &truncated, &c.tol)?.value - closed).abs()
        } else {
            0.0
        }
    };

    let k = kolmogorov_characterizations(&a, &xi, &c.tol)?;
    let characterizations = (k[0] - k[1]).abs().max((k[1] - k[2]).abs());
    Ok(vec![trace.scalar_monotonicity_violation(true), (estimate - closed).abs(), scaling, truncation, characterizations])
}

fn t14(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(ANY)?;
    let mut rho = 0.0f64;
    let mut k = 0.0f64;
    for p in rho_spectrum_set(&a, &c.tol)? {
        rho = rho.max((p.rho - p.level).abs());
        let w = DVector::from_vec(p.witness);
        k = k.max((kolmogorov_closed(&a, &w, &c.tol)?.value - p.level).abs());
    }
    Ok(vec![rho, k])
}

fn t15(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(&[WellSeparated, WithZeros, Clustered])?;
    let xi = c.unit();
    let (k, dual) = kolmogorov_duality(&a, &xi, &c.tol)?;
    let ratio = if k > 0.0 && dual > 0.0 { (k / dual - 1.0).abs() } else { 1.0 };
    let d = eig_sym(&a, &c.tol)?;
    let kernel = if d.lambda_min() <= c.tol.rank_abs(d.norm()) {
        let (k0, d0) = kolmogorov_duality(&a, &d.eigenvector(0), &c.tol)?;
        k0.abs() + d0.abs()
    } else {
        0.0
    };
    Ok(vec![ratio, kernel])
}

pub(crate) const THEOREMS: &[Property] = &[
    Property {
        id: "T1",
        title: "shorted operator: Anderson-Trapp and Schur routes agree",
        checks: &[("agreement", 1e-8)],
        gating: true,
        run: t1,
    },
    Property {
        id: "T2",
        title: "shorted operator composition over an intersection",
        checks: &[("composition", 1e-8)],
        gating: true,
        run: t2,
    },
    Property {
        id: "T3",
        title: "spectral shorted operator: closed form and iterated limit agree",
        checks: &[("agreement", 1e-6), ("trace_monotone", 1e-9), ("converged", 0.0)],
        gating: true,
        run: t3,
    },
    Property {
        id: "T4",
        title: "power identity rho(S, A^t) = rho(S, A)^t",
        checks: &[("t=0.5", 1e-7), ("t=2", 1e-7), ("t=3", 1e-7)],
        gating: true,
        run: t4,
    },
    Property { id: "T5", title: "rho composition over an intersection", checks: &[("composition", 1e-7)], gating: true, run: t5 },
    Property {
        id: "T6",
        title: "spectrum of rho lies in the spectrum of A",
        checks: &[("inclusion", 1e-7)],
        gating: true,
        run: t6,
    },
    Property {
        id: "T7",
        title: "minimum of the spectrum of rho on S",
        checks: &[("grid_formula", 0.0), ("lower_bound", 1e-9)],
        gating: true,
        run: t7,
    },
    Property {
        id: "T8",
        title: "monotone functional calculus commutes with rho",
        checks: &[("square", 1e-8), ("sqrt", 1e-8), ("step", 1e-8)],
        gating: true,
        run: t8,
    },
    Property {
        id: "T9",
        title: "shorted power identity for inverse powers",
        checks: &[("identity", 1e-9)],
        gating: true,
        run: t9,
    },
    Property {
        id: "T10",
        title: "rho(A, xi) as the pseudo-inverse power limit",
        checks: &[("limit", 1e-6), ("outside_range", 0.0)],
        gating: true,
        run: t10,
    },
    Property {
        id: "T11",
        title: "spectral order decision",
        checks: &[("commuting_pair_holds", 0.0), ("known_violation_detected", 0.0)],
        gating: true,
        run: t11,
    },
    Property {
        id: "T12",
        title: "spectral order through one-dimensional rho",
        checks: &[("order_implies_rho", 1e-9), ("witness_found", 0.0)],
        gating: true,
        run: t12,
    },
    Property {
        id: "T13",
        title: "Kolmogorov complexity: monotone trace and closed form",
        checks: &[
            ("trace_increasing", 1e-9),
            ("agreement", 1e-6),
            ("scaling", 0.0),
            ("truncation", 0.0),
            ("characterizations", 0.0),
        ],
        gating: true,
        run: t13,
    },
    Property {
        id: "T14",
        title: "every level is attained by rho and by k",
        checks: &[("rho_attains", 0.0), ("k_attains", 0.0)],
        gating: true,
        run: t14,
    },
    Property {
        id: "T15",
        title: "Kolmogorov complexity and rho of the pseudo-inverse",
        checks: &[("duality", 1e-8), ("kernel", 0.0)],
        gating: true,
        run: t15,
    },
];

fn p1(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(INVERTIBLE)?;
    let s = c.subspace(1)?;
    let norm = a.norm2();
    let sigma = short_at(&a, &s, &c.tol)?.value;
    let below = loewner_gap(&sigma, &a, norm);

    // A random candidate with range in S, scaled until it touches A.
    let k = s.dim();
    let g = DMatrix::from_fn(k, k, |_, _| c.rng.random_range(-1.0..1.0));
    let x = SymMatrix::symmetrize(s.basis() * (&g * g.transpose()) * s.basis().transpose());
    let root_inv = matrix_power(&pseudo_inverse(&a, &c.tol)?, 0.5, &c.tol)?;
    let peak = x.congruence(root_inv.as_matrix()).norm2();
    let dominated = if peak > 0.0 { loewner_gap(&x.scale(1.0 / peak), &sigma, norm) } else { 0.0 };

    let v = c.unit_in(&s);
    let pushed = sigma.add(&SymMatrix::symmetrize(&v * v.transpose() * (0.1 * norm)));
    let not_improvable = flag(a.sub(&pushed).min_eigenvalue() < 0.0);
    Ok(vec![below, dominated, not_improvable])
}

fn p2(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(ANY)?;
    let (s, t) = c.nested()?;
    let lo = short_at(&a, &s, &c.tol)?.value;
    let hi = short_at(&a, &t, &c.tol)?.value;
    Ok(vec![loewner_gap(&lo, &hi, a.norm2())])
}

fn p3(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(ANY)?;
    let extra_values: Vec<f64> = (0..c.n).map(|_| c.rng.random::<f64>()).collect();
    let b = a.add(&with_spectrum(&extra_values, &mut c.rng));
    let s = c.subspace(0)?;
    let lo = short_at(&a, &s, &c.tol)?.value;
    let hi = short_at(&b, &s, &c.tol)?.value;
    Ok(vec![loewner_gap(&lo, &hi, b.norm2())])
}

fn p4(c: &mut Ctx) -> Result<Vec<f64>> {
    let a = c.psd(ANY)?;
    let (s, t) = c.two_subspaces()?;
    let lhs = spectral_short_closed(&a, &projection_meet(&s, &t, &c.tol)?, &c.tol)?.value;
    let rhs = spectral_short_closed(&short_at(&a, &s, &c.tol)?.value, &t, &c.tol)?.value;
    let norm = a.norm2();
    Ok(vec![loewner_gap(&lhs, &rhs, norm), rel(rhs.max_abs_diff(&lhs), norm)])
}

fn p5(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, (inner, s)) =
        c.draw_until(|c| Ok((c.psd(ANY)?, c.nested()?)), |(a, (inner, s)), tol| clear_meets(a, &[inner, s], tol))?;
    let norm = a.norm2();
    let rho = spectral_short_closed(&a, &s, &c.tol)?.value;
    let mut membership = rel((rho.as_matrix() - s.projection().as_matrix() * rho.as_matrix()).amax(), norm);
    for m in 1..=6 {
        let am = matrix_power(&a, m as f64, &c.tol)?;
        let rm = matrix_power(&rho, m as f64, &c.tol)?;
        membership = membership.max(loewner_gap(&rm, &am, norm.powi(m).max(1.0)));
    }

    let theta: f64 = c.rng.random();
    let mut loewner = 0.0f64;
    let mut spectral = true;
    for d in [rho.scale(theta), spectral_short_closed(&a, &inner, &c.tol)?.value] {
        if spectral_leq(&d, &a, &c.tol)?.holds {
            loewner = loewner.max(loewner_gap(&d, &rho, norm));
            spectral &= spectral_leq(&d, &rho, &c.tol)?.holds;
        }
    }
    Ok(vec![membership, loewner, flag(spectral)])
}

fn p6(c: &mut Ctx) -> Result<Vec<f64>> {
    let ((a, b), (s, t)) = c.draw_until(
        |c| Ok((c.pair()?, c.nested()?)),
        |((a, b), (s, t)), tol| Ok(clear_meets(a, &[s], tol)? && clear_meets(b, &[t], tol)?),
    )?;
    let lo = spectral_short_closed(&a, &s, &c.tol)?.value;
    let hi = spectral_short_closed(&b, &t, &c.tol)?.value;
    Ok(vec![flag(spectral_leq(&lo, &hi, &c.tol)?.holds)])
}

fn p7(c: &mut Ctx) -> Result<Vec<f64>> {
    let (a, b) = c.pair()?;
    let mut powers = 0.0f64;
    for m in 1..=6 {
        let am = matrix_power(&a, m as f64, &c.tol)?;
        let bm = matrix_power(&b, m as f64, &c.tol)?;
        powers = powers.max(loewner_gap(&am, &bm, bm.norm2().max(1.0)));
    }
    let da = eig_sym(&a, &c.tol)?;
    let db = eig_sym(&b, &c.tol)?;
    let mut levels = da.level_values();
    levels.extend(db.level_values());
    let threshold = midpoint_threshold(&levels, c.tol.cluster_abs(db.norm()), &mut c.rng);
    let step = |t: f64| if t >= threshold { 1.0 } else { 0.0 };
    let roots = loewner_gap(&matrix_function(&da, f64::sqrt)?, &matrix_function(&db, f64::sqrt)?, 1.0);
    let steps = loewner_gap(&matrix_function(&da, step)?, &matrix_function(&db, step)?, 1.0);
    Ok(vec![powers, roots, steps])
}

pub(crate) const PROPERTIES: &[Property] = &[
    Property {
        id: "P1",
        title: "shorted operator is the maximum below A with range in S",
        checks: &[("below_a", 1e-9), ("dominates_candidates", 1e-9), ("not_improvable", 0.0)],
        gating: true,
        run: p1,
    },
    Property { id: "P2", title: "shorted operator is monotone in S", checks: &[("nested", 1e-9)], gating: true, run: p2 },
    Property { id: "P3", title: "shorted operator is monotone in A", checks: &[("ordered", 1e-9)], gating: true, run: p3 },
    Property {
        id: "P4",
        title: "rho over an intersection against rho of the shorted operator (known to fail; reported only)",
        checks: &[("inequality", 1e-9), ("observed_gap", f64::MAX)],
        gating: false,
        run: p4,
    },
    Property {
        id: "P5",
        title: "rho is the maximum of the matrices spectrally below A with range in S",
        checks: &[("membership", 1e-9), ("maximum_loewner", 1e-9), ("maximum_spectral", 0.0)],
        gating: true,
        run: p5,
    },
    Property {
        id: "P6",
        title: "rho is monotone for the spectral order and nested subspaces",
        checks: &[("spectral", 0.0)],
        gating: true,
        run: p6,
    },
    Property {
        id: "P7",
        title: "spectral order implies ordered powers and monotone functions",
        checks: &[("powers", 1e-9), ("sqrt", 1e-9), ("step", 1e-9)],
        gating: true,
        run: p7,
    },
];

pub(crate) fn negative_controls(tol: &Tolerances) -> Vec<ControlReport> {
    let (a, b) = known_violation();
    let order = spectral_leq(&a, &b, tol);
    let xi = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
    let gap = Subspace::line(&xi).and_then(|s| {
        let d = SymMatrix::diag(&[1.0, 2.0]);
        let sigma = short_at(&d, &s, tol)?.value.quad(&xi);
        let rho = spectral_short_closed(&d, &s, tol)?.value.quad(&xi);
        Ok(sigma - rho)
    });
    let counterexample = intersection_counterexample(tol);
    vec![
        ControlReport {
            id: "NC1".into(),
            description: "[[1,1],[1,1]] <= [[2,1],[1,1]] in the Loewner order but not spectrally".into(),
            value: order.as_ref().map_or(f64::MAX, |o| o.worst_residual),
            detected: order.is_ok_and(|o| !o.holds),
        },
        ControlReport {
            id: "NC2".into(),
            description: "shorted and spectral shorted operators differ by 1/3 for diag(1,2) on (e1+e2)/sqrt(2)".into(),
            value: *gap.as_ref().unwrap_or(&f64::MAX),
            detected: gap.is_ok_and(|g| (g - 1.0 / 3.0).abs() < 1e-12),
        },
        ControlReport {
            id: "NC3".into(),
            description: "rho(S∩T, A) exceeds rho(T, Σ(S, A)) by 2 - (37 - sqrt(73))/18 for A = diag(1,2,3)".into(),
            value: *counterexample.as_ref().unwrap_or(&f64::MAX),
            detected: counterexample.is_ok_and(|g| (g - (2.0 - (37.0 - 73f64.sqrt()) / 18.0)).abs() < 1e-12),
        },
    ]
}

/// `A = diag(1, 2, 3)`, `S = span{(0,1,1), (1,−1,1)}`, `T = span{(0,1,1), (1,0,0)}`.
/// Both sides are multiples of the projection onto `ξ = (0,1,1)/√2`; returns
/// the excess `⟨ρ(S∩T, A)ξ, ξ⟩ − ⟨ρ(T, Σ(S, A))ξ, ξ⟩`.
pub(crate) fn intersection_counterexample(tol: &Tolerances) -> Result<f64> {
    let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
    let v = |x: [f64; 3]| DVector::from_column_slice(&x);
    let s = Subspace::span_of(3, &[v([0.0, 1.0, 1.0]), v([1.0, -1.0, 1.0])], tol.orth_tol)?;
    let t = Subspace::span_of(3, &[v([0.0, 1.0, 1.0]), v([1.0, 0.0, 0.0])], tol.orth_tol)?;
    let xi = v([0.0, 1.0, 1.0]) / 2f64.sqrt();
    let lhs = spectral_short_closed(&a, &projection_meet(&s, &t, tol)?, tol)?.value;
    let rhs = spectral_short_closed(&short_at(&a, &s, tol)?.value, &t, tol)?.value;
    Ok(lhs.quad(&xi) - rhs.quad(&xi))
}
