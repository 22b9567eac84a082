//! Checkers for the sufficient conditions of the mixed Christoffel problem.
//!
//! Each checker returns a [`ConditionVerdict`]: the worst margin over every
//! sampled point, frame and index, where it occurred, and how many samples
//! were taken. Frame-dependent conditions are checked on sampled frames, not
//! proved for all frames; the verdict's `quantifier` says which.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{min_eig_2x2, min_eig_3x3};
use crate::bodies::{c4_norm_estimate, BodySpec, TensorFunction};
use crate::error::{Error, Result};
use crate::jets::{frame_block, reciprocal_jet, ScalarField, SphereFunction};
use crate::sphere::{FramedGrid, Geodesic, SphericalField};

/// Where a verdict's margin was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub node: usize,
    /// Index of the sampled frame, direction, or sample.
    pub frame: usize,
    /// Rotation of the node frame in radians, when frames are sampled.
    pub angle: f64,
    pub q: Option<usize>,
    pub l: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub tol: f64,
    pub witness: Witness,
    pub samples: usize,
    pub quantifier: String,
}

/// Sampling and tolerance settings shared by the checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub tol: f64,
    pub n_dirs: usize,
    pub frames_per_node: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            n_dirs: 64,
            frames_per_node: 16,
            n_samples: 2048,
            seed: 0,
        }
    }
}

/// Margins with magnitude at or below this trigger one 4× denser resample.
const RESAMPLE_BAND: f64 = 1e-4;
/// Candidates within this relative distance of the minimum count as tied;
/// the lowest node (then frame) wins.
const TIE_REL: f64 = 1e-9;
/// Step of the 9-point geodesic stencils. Eighth-order accuracy lets the
/// step stay large, which keeps rounding in the second derivative near 1e-12.
const FD_STEP: f64 = 2e-2;
/// Central-difference weights for offsets 0..=4 (odd, resp. even, extension).
const STENCIL_D1: [f64; 5] = [0.0, 4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const STENCIL_D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
const FD_STEP_1D: f64 = 5e-3;
/// Inputs with `min f < DEGENERATE_REL · max f` are refused.
const DEGENERATE_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    witness: Witness,
}

fn reduce(candidates: &[Candidate]) -> Candidate {
    let min = candidates.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let slack = TIE_REL * min.abs().max(1.0);
    let mut best = *candidates
        .iter()
        .find(|c| c.value <= min + slack)
        .expect("at least one candidate");
    best.value = min;
    best
}

fn verdict(name: &str, best: Candidate, tol: f64, samples: usize, quantifier: String) -> ConditionVerdict {
    ConditionVerdict {
        name: name.to_string(),
        pass: best.value >= -tol,
        margin: best.value,
        tol,
        witness: best.witness,
        samples,
        quantifier,
    }
}

/// Rotation angles in `[0, π)`: a van der Corput sequence shifted by a
/// seeded offset. Every prefix is the smaller sample, so adding frames never
/// raises a minimum.
pub fn sample_angles(count: usize, seed: u64) -> Vec<f64> {
    let offset: f64 = ChaCha8Rng::seed_from_u64(seed).random();
    (0..count)
        .map(|k| {
            let mut v = 0.0;
            let mut denom = 1.0;
            let mut n = k;
            while n > 0 {
                denom *= 2.0;
                v += (n & 1) as f64 / denom;
                n >>= 1;
            }
            std::f64::consts::PI * (v + offset).fract()
        })
        .collect()
}

fn check_density<F: SphereFunction + ?Sized>(f: &F, grid: &FramedGrid) -> Result<()> {
    let values = grid.sample(|x| f.value(x));
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min > DEGENERATE_REL * max) || !(max > 0.0) {
        return Err(Error::Domain(format!(
            "density must be positive on the grid (min {min:e}, max {max:e})"
        )));
    }
    Ok(())
}

/// Covariant 2-jet of a scalar in a frame: value, gradient, Hessian.
#[derive(Debug, Clone, Copy)]
struct Scalar2 {
    v: f64,
    g: Vector2<f64>,
    h: Matrix2<f64>,
}

impl Scalar2 {
    fn quotient(self, d: Scalar2) -> Scalar2 {
        let (a, f) = (self, d);
        let f2 = f.v * f.v;
        Scalar2 {
            v: a.v / f.v,
            g: a.g / f.v - f.g * (a.v / f2),
            h: a.h / f.v - (a.g * f.g.transpose() + f.g * a.g.transpose()) / f2 - f.h * (a.v / f2)
                + f.g * f.g.transpose() * (2.0 * a.v / (f2 * f.v)),
        }
    }

    fn rotated(self, r: &Matrix2<f64>) -> Scalar2 {
        Scalar2 {
            v: self.v,
            g: r.transpose() * self.g,
            h: r.transpose() * self.h * r,
        }
    }

    fn weingarten(&self) -> Matrix2<f64> {
        self.h + Matrix2::identity() * self.v
    }
}

/// Value, covariant gradient and Hessian of the frame components
/// `a_ij = A(Eᵢ, Eⱼ)` at a node, with `Eᵢ` parallel-transported along
/// geodesics from the node (so the frame has vanishing covariant derivative
/// there).
#[derive(Debug, Clone, Copy)]
struct EntryJets {
    value: Matrix2<f64>,
    grad: [Matrix2<f64>; 2],
    hess: [[Matrix2<f64>; 2]; 2],
}

impl EntryJets {
    fn compute<T: TensorFunction + ?Sized>(a: &T, x: &Vector3<f64>, frame: &[Vector3<f64>; 2]) -> Self {
        let value = frame_block(&a.ambient(x), frame);
        let along = |d: &Vector3<f64>| {
            let geo = Geodesic::new(x, d);
            let at = |t: f64| {
                let e = [geo.transport(&frame[0], t), geo.transport(&frame[1], t)];
                frame_block(&a.ambient(&geo.point(t)), &e)
            };
            let mut d1 = Matrix2::zeros();
            let mut d2 = STENCIL_D2[0] * value;
            for k in 1..=4 {
                let t = k as f64 * FD_STEP;
                let (p, m) = (at(t), at(-t));
                d1 += (p - m) * STENCIL_D1[k];
                d2 += (p + m) * STENCIL_D2[k];
            }
            (d1 / FD_STEP, d2 / (FD_STEP * FD_STEP))
        };
        let (g0, h00) = along(&frame[0]);
        let (g1, h11) = along(&frame[1]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (_, hp) = along(&((frame[0] + frame[1]) * s));
        let (_, hm) = along(&((frame[0] - frame[1]) * s));
        let h01 = (hp - hm) * 0.5;
        Self {
            value,
            grad: [g0, g1],
            hess: [[h00, h01], [h01, h11]],
        }
    }

    /// Jets in the frame rotated by `r` (columns are the new frame vectors).
    fn rotated(&self, r: &Matrix2<f64>) -> Self {
        let conj = |m: &Matrix2<f64>| r.transpose() * m * r;
        let g = [conj(&self.grad[0]), conj(&self.grad[1])];
        let h = [
            [conj(&self.hess[0][0]), conj(&self.hess[0][1])],
            [conj(&self.hess[1][0]), conj(&self.hess[1][1])],
        ];
        let mut grad = [Matrix2::zeros(); 2];
        let mut hess = [[Matrix2::zeros(); 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                grad[k] += g[i] * r[(i, k)];
            }
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        hess[k][l] += h[i][j] * (r[(i, k)] * r[(j, l)]);
                    }
                }
            }
        }
        Self {
            value: conj(&self.value),
            grad,
            hess,
        }
    }

    fn entry(&self, p: usize, q: usize) -> Scalar2 {
        Scalar2 {
            v: self.value[(p, q)],
            g: Vector2::new(self.grad[0][(p, q)], self.grad[1][(p, q)]),
            h: Matrix2::new(
                self.hess[0][0][(p, q)],
                self.hess[0][1][(p, q)],
                self.hess[1][0][(p, q)],
                self.hess[1][1][(p, q)],
            ),
        }
    }
}

fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn density_jet<F: SphereFunction + ?Sized>(f: &F, x: &Vector3<f64>, frame: &[Vector3<f64>; 2]) -> Scalar2 {
    let (v, g, h) = f.jet(x).covariant(x, frame);
    Scalar2 { v, g, h }
}

/// Convexity of the 1-homogeneous extension of `1/f`: the smallest
/// eigenvalue of `W[1/f]` over the grid.
pub fn check_gm<F: SphereFunction + ?Sized>(f: &F, grid: &FramedGrid, tol: f64) -> Result<ConditionVerdict> {
    check_density(f, grid)?;
    let candidates: Vec<Candidate> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let w = reciprocal_jet(x, &f.jet(x)).in_frame(grid.frame(i));
            Candidate {
                value: min_eig_2x2(&w),
                witness: Witness {
                    node: i,
                    frame: 0,
                    angle: 0.0,
                    q: None,
                    l: None,
                },
            }
        })
        .collect();
    Ok(verdict(
        "gm",
        reduce(&candidates),
        tol,
        grid.len(),
        "all nodes (frame-invariant)".into(),
    ))
}

/// Runs a per-node, per-frame sampler; resamples once with 4× the frames if
/// the margin lands within [`RESAMPLE_BAND`] of zero.
fn sampled_frames<S>(grid: &FramedGrid, count: usize, seed: u64, per_node: S) -> (Candidate, usize, usize)
where
    S: Fn(usize, &[f64]) -> Vec<Candidate> + Sync,
{
    let run = |count: usize| {
        let angles = sample_angles(count, seed);
        let all: Vec<Candidate> = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|i| per_node(i, &angles))
            .collect();
        (reduce(&all), all.len())
    };
    let (best, samples) = run(count);
    if best.value.abs() <= RESAMPLE_BAND {
        let (best, samples) = run(4 * count);
        return (best, samples, 4 * count);
    }
    (best, samples, count)
}

/// The n = 2 condition: for q = 1, 2 and every sampled frame,
/// `W[a_qq / f] ⪰ 0`, with `a_qq` the frame-dependent diagonal entry of `A`.
pub fn check_cond_n2<T, F>(a: &T, f: &F, grid: &FramedGrid, opts: &CheckOptions) -> Result<ConditionVerdict>
where
    T: TensorFunction + ?Sized,
    F: SphereFunction + ?Sized,
{
    check_density(f, grid)?;
    let (best, samples, used) = sampled_frames(grid, opts.n_dirs, opts.seed, |i, angles| {
        let x = grid.node(i);
        let frame = grid.frame(i);
        let entries = EntryJets::compute(a, x, frame);
        let fj = density_jet(f, x, frame);
        let mut out = Vec::with_capacity(2 * angles.len());
        for (k, &angle) in angles.iter().enumerate() {
            let r = rotation(angle);
            let rot = entries.rotated(&r);
            let fr = fj.rotated(&r);
            for q in 0..2 {
                let s = rot.entry(q, q).quotient(fr);
                out.push(Candidate {
                    value: min_eig_2x2(&s.weingarten()),
                    witness: Witness {
                        node: i,
                        frame: k,
                        angle,
                        q: Some(q + 1),
                        l: None,
                    },
                });
            }
        }
        out
    });
    Ok(verdict(
        "cond_n2",
        best,
        opts.tol,
        samples,
        format!("{used} sampled frames per node, q = 1, 2"),
    ))
}

/// The constant-rank condition matrix
/// `δ + ∇²(a_qq/f)/(a_qq/f) + ½ ∇a_qq ∇a_qqᵀ/a_qq² − ½ Σ_{α,β≤l} a^{αβ} ∇a_qα ∇a_qβᵀ / a_qq`
/// at one node, for every sampled frame angle, `q ∈ 1..=n`, `l ∈ 1..n`.
/// Returns `(angle index, q, l, matrix)`.
fn cond_l_matrices<T, F>(
    a: &T,
    f: &F,
    x: &Vector3<f64>,
    frame: &[Vector3<f64>; 2],
    angles: &[f64],
) -> Vec<(usize, usize, usize, Matrix2<f64>)>
where
    T: TensorFunction + ?Sized,
    F: SphereFunction + ?Sized,
{
    const N: usize = 2;
    let entries = EntryJets::compute(a, x, frame);
    let fj = density_jet(f, x, frame);
    let mut out = Vec::new();
    for (k, &angle) in angles.iter().enumerate() {
        let r = rotation(angle);
        let rot = entries.rotated(&r);
        let fr = fj.rotated(&r);
        let inv = rot.value.try_inverse().unwrap_or_else(|| Matrix2::from_element(f64::NAN));
        for q in 0..N {
            let aqq = rot.entry(q, q);
            let s = aqq.quotient(fr);
            let base = Matrix2::identity() + s.h / s.v + aqq.g * aqq.g.transpose() * (0.5 / (aqq.v * aqq.v));
            for l in 1..N {
                let mut sub = Matrix2::zeros();
                for al in 0..l {
                    for be in 0..l {
                        let ga = rot.entry(q, al).g;
                        let gb = rot.entry(q, be).g;
                        sub += ga * gb.transpose() * inv[(al, be)];
                    }
                }
                let m = base - sub * (0.5 / aqq.v);
                out.push((k, q + 1, l, (m + m.transpose()) * 0.5));
            }
        }
    }
    out
}

/// The general constant-rank condition on sampled frames.
pub fn check_cond_l<T, F>(a: &T, f: &F, grid: &FramedGrid, opts: &CheckOptions) -> Result<ConditionVerdict>
where
    T: TensorFunction + ?Sized,
    F: SphereFunction + ?Sized,
{
    check_density(f, grid)?;
    let (best, samples, used) = sampled_frames(grid, opts.frames_per_node, opts.seed, |i, angles| {
        cond_l_matrices(a, f, grid.node(i), grid.frame(i), angles)
            .into_iter()
            .map(|(k, q, l, m)| Candidate {
                value: min_eig_2x2(&m),
                witness: Witness {
                    node: i,
                    frame: k,
                    angle: angles[k],
                    q: Some(q),
                    l: Some(l),
                },
            })
            .collect()
    });
    Ok(verdict(
        "cond_l",
        best,
        opts.tol,
        samples,
        format!("{used} sampled frames per node, all q and l"),
    ))
}

/// `ψ(t) = W_h(γ(t))[γ′(t), γ′(t)] / f(γ(t))` along the great circle through
/// `x` in direction `d`; returns `ψ″(0) + ψ(0)` by a 5-point stencil.
fn new_form_value<H, F>(h: &H, f: &F, x: &Vector3<f64>, d: &Vector3<f64>) -> f64
where
    H: SphereFunction + ?Sized,
    F: SphereFunction + ?Sized,
{
    let geo = Geodesic::new(x, d);
    let psi = |t: f64| {
        let p = geo.point(t);
        let v = geo.velocity(t);
        v.dot(&(h.jet(&p).hess * v)) / f.value(&p)
    };
    let dt = FD_STEP_1D;
    let p0 = psi(0.0);
    let second = (-psi(2.0 * dt) + 16.0 * psi(dt) - 30.0 * p0 + 16.0 * psi(-dt) - psi(-2.0 * dt)) / (12.0 * dt * dt);
    second + p0
}

/// `((h_αα + h)/f)_αα + (h_αα + h)/f ≥ 0` for every node and sampled
/// direction `α`, evaluated along great circles.
pub fn check_new_form_3d<H, F>(h: &H, f: &F, grid: &FramedGrid, opts: &CheckOptions) -> Result<ConditionVerdict>
where
    H: SphereFunction + ?Sized,
    F: SphereFunction + ?Sized,
{
    check_density(f, grid)?;
    let (best, samples, used) = sampled_frames(grid, opts.n_dirs, opts.seed, |i, angles| {
        angles
            .iter()
            .enumerate()
            .map(|(k, &angle)| {
                let d = grid.rotated_frame(i, angle)[0];
                Candidate {
                    value: new_form_value(h, f, grid.node(i), &d),
                    witness: Witness {
                        node: i,
                        frame: k,
                        angle,
                        q: None,
                        l: None,
                    },
                }
            })
            .collect()
    });
    Ok(verdict(
        "new_form_3d",
        best,
        opts.tol,
        samples,
        format!("{used} sampled directions per node"),
    ))
}

/// `M(p) = |p|² f(p/|p|)⁻¹ D²h(p)`, which on the cone equals
/// `|p| · D²h(p̂) / f(p̂)`.
pub fn convexity_map<H, F>(h: &H, f: &F, p: &Vector3<f64>) -> Matrix3<f64>
where
    H: SphereFunction + ?Sized,
    F: SphereFunction + ?Sized,
{
    let r = p.norm();
    let x = p / r;
    h.jet(&x).hess * (r / f.value(&x))
}

/// Local convexity of `M`: second differences
/// `(M(p+sv) + M(p−sv) − 2M(p)) / s²` at seeded random `(p, v)` and
/// `s ∈ {1e-2, 1e-3}`, with `p` on rays through the grid nodes.
pub fn check_matrix_convexity<H, F>(h: &H, f: &F, grid: &FramedGrid, opts: &CheckOptions) -> Result<ConditionVerdict>
where
    H: SphereFunction + ?Sized,
    F: SphereFunction + ?Sized,
{
    check_density(f, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draws: Vec<(usize, f64, Vector3<f64>)> = (0..opts.n_samples)
        .map(|k| {
            let radius = rng.random_range(0.5..2.0);
            let v = loop {
                let c = Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let n = c.norm();
                if n > 1e-3 && n <= 1.0 {
                    break c / n;
                }
            };
            (k % grid.len(), radius, v)
        })
        .collect();
    let candidates: Vec<Candidate> = draws
        .par_iter()
        .enumerate()
        .map(|(k, (node, radius, v))| {
            let p = grid.node(*node) * *radius;
            let center = convexity_map(h, f, &p);
            let value = [1e-2, 1e-3]
                .iter()
                .map(|&s| {
                    let d2 = (convexity_map(h, f, &(p + v * s)) + convexity_map(h, f, &(p - v * s)) - center * 2.0)
                        / (s * s);
                    min_eig_3x3(&d2)
                })
                .fold(f64::INFINITY, f64::min);
            Candidate {
                value,
                witness: Witness {
                    node: *node,
                    frame: k,
                    angle: 0.0,
                    q: None,
                    l: None,
                },
            }
        })
        .collect();
    Ok(verdict(
        "matrix_convexity",
        reduce(&candidates),
        opts.tol,
        candidates.len(),
        format!("{} seeded (p, v) samples on rays through the nodes, s in {{1e-2, 1e-3}}", candidates.len()),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationVerdict {
    /// Passes iff the norm estimate is below `C/4`; margin is `C/4 − estimate`.
    pub verdict: ConditionVerdict,
    pub norm_estimate: f64,
    /// The fourth-order condition on `h = C + ψ` with `f ≡ 1`, run when the
    /// bound passes.
    pub implied: Option<ConditionVerdict>,
    /// False only if the bound passed but the implied condition failed.
    pub implication_holds: bool,
}

/// `‖ψ‖_{C⁴} < C/4`, estimated by great-circle derivative sampling, and
/// the implication to the fourth-order condition on `h = C + ψ`.
pub fn check_perturbation_bound(
    c: f64,
    psi: &SphericalField,
    grid: &FramedGrid,
    opts: &CheckOptions,
) -> Result<PerturbationVerdict> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("perturbation constant {c} must be positive")));
    }
    let norm = c4_norm_estimate(psi, grid, opts.n_dirs);
    let margin = 0.25 * c - norm;
    let v = ConditionVerdict {
        name: "perturbation_bound".into(),
        pass: margin > 0.0,
        margin,
        tol: 0.0,
        witness: Witness {
            node: 0,
            frame: 0,
            angle: 0.0,
            q: None,
            l: None,
        },
        samples: grid.len() * opts.n_dirs,
        quantifier: format!("sup of |ψ|..|ψ⁗| over {} directions per node", opts.n_dirs),
    };
    let (implied, implication_holds) = if v.pass {
        let body = BodySpec::HarmonicPerturbation { c, psi: psi.clone() };
        let r = check_new_form_3d(&body, &ScalarField::constant(1.0), grid, opts)?;
        let ok = r.pass;
        (Some(r), ok)
    } else {
        (None, true)
    };
    Ok(PerturbationVerdict {
        verdict: v,
        norm_estimate: norm,
        implied,
        implication_holds,
    })
}
