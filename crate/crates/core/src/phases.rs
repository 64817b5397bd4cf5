//! The phase catalogue: linear maps, the cosine benchmark, piecewise-linear
//! phases, primitives of Cantor staircases, nested nowhere-linear sums, and
//! circle diffeomorphisms t + εφ(t).
//!
//! Every phase is φ(t) = w·t + φ₀(t) with integer winding w and a periodic
//! residual φ₀ held either as an exact list of affine pieces or as a smooth
//! evaluator (the cosine family). Keeping the integer part separate makes
//! integer modulation φ ↦ φ + m·t an exact index shift downstream.
//!
//! Depth-truncated constructions are genuinely piecewise-affine: the
//! staircase wave ψ = sin(2π·σ) is replaced on each level-J interval by its
//! exact average, which keeps the primitive piecewise-affine while the
//! first-order truncation error cancels interval by interval (both σ and its
//! linear interpolant have mean gain 2^{-J-1} there). The certified
//! sup-distance to the untruncated primitive is (4π² + 2π)·χ(ρ_J).

use crate::cantor::{build_levels, CantorLevels};
use crate::error::{CoreError, Result};
use crate::modulus::Modulus;
use crate::util::sin2pi;
use std::f64::consts::{PI, TAU};

/// One affine piece of a residual phase: φ₀(t) = y0 + slope·(t - x0) on [x0, x1].
#[derive(Debug, Clone, Copy)]
pub struct AffinePiece {
    pub x0: f64,
    pub x1: f64,
    pub slope: f64,
    pub y0: f64,
}

#[derive(Debug, Clone)]
enum Repr {
    Affine(Vec<AffinePiece>),
    /// φ₀(t) = scale·cos(t), kept as an exact evaluator.
    Cos {
        scale: f64,
    },
}

/// A real phase on [0, 2π] with certified metadata.
#[derive(Debug, Clone)]
pub struct PhaseFn {
    repr: Repr,
    int_slope: i64,
    sup_deriv: f64,
    monotone_pieces: usize,
    perturbation: f64,
    lip_cert: Option<(Modulus, f64)>,
    kind: &'static str,
}

/// Placement schedule of the nested construction: the host intervals I_m,
/// the scale factors ε_m, and the residual sums δ_j = Σ_{m>j} ε_m·ρ_m/|I_m|.
#[derive(Debug, Clone)]
pub struct NestedSchedule {
    pub levels: u32,
    pub intervals: Vec<(f64, f64)>,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    /// ρ_m for m = 0..=levels, for invariant checks.
    pub rho: Vec<f64>,
}

impl PhaseFn {
    fn from_pieces(
        pieces: Vec<AffinePiece>,
        int_slope: i64,
        perturbation: f64,
        kind: &'static str,
    ) -> Self {
        let sup_res = pieces.iter().fold(0.0_f64, |m, p| m.max(p.slope.abs()));
        let monotone_pieces = monotone_runs(&pieces);
        PhaseFn {
            repr: Repr::Affine(pieces),
            int_slope,
            sup_deriv: sup_res + int_slope.unsigned_abs() as f64,
            monotone_pieces,
            perturbation,
            lip_cert: None,
            kind,
        }
    }

    /// φ(t) for t in [0, 2π].
    pub fn eval(&self, t: f64) -> f64 {
        self.int_slope as f64 * t + self.eval_residual(t)
    }

    /// The periodic residual φ₀(t) = φ(t) - w·t.
    pub fn eval_residual(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Affine(pieces) => {
                let i = piece_index(pieces, t);
                let p = &pieces[i];
                p.y0 + p.slope * (t - p.x0)
            }
            Repr::Cos { scale } => scale * t.cos(),
        }
    }

    /// φ'(t); at a breakpoint of an affine phase the right-hand slope.
    pub fn deriv(&self, t: f64) -> f64 {
        self.int_slope as f64
            + match &self.repr {
                Repr::Affine(pieces) => pieces[piece_index(pieces, t)].slope,
                Repr::Cos { scale } => -scale * t.sin(),
            }
    }

    pub fn pieces(&self) -> Option<&[AffinePiece]> {
        match &self.repr {
            Repr::Affine(p) => Some(p),
            Repr::Cos { .. } => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.repr, Repr::Cos { .. })
    }

    /// For the smooth kinds, the cosine amplitude.
    pub fn cos_scale(&self) -> Option<f64> {
        match self.repr {
            Repr::Cos { scale } => Some(scale),
            _ => None,
        }
    }

    /// Integer winding w with φ(2π) - φ(0) = 2πw.
    pub fn winding(&self) -> i64 {
        self.int_slope
    }

    /// Certified bound on sup|φ'| (integer part included).
    pub fn sup_deriv(&self) -> f64 {
        self.sup_deriv
    }

    /// Certified bound on sup|φ₀'| of the residual alone.
    pub fn residual_sup_deriv(&self) -> f64 {
        match &self.repr {
            Repr::Affine(pieces) => pieces.iter().fold(0.0_f64, |m, p| m.max(p.slope.abs())),
            Repr::Cos { scale } => scale.abs(),
        }
    }

    /// ‖φ₀'‖_{L²} on the normalized circle (an exact value for both kinds).
    pub fn residual_deriv_l2(&self) -> f64 {
        match &self.repr {
            Repr::Affine(pieces) => {
                let sum: f64 = pieces
                    .iter()
                    .map(|p| p.slope * p.slope * (p.x1 - p.x0))
                    .sum();
                (sum / TAU).sqrt()
            }
            Repr::Cos { scale } => scale.abs() / std::f64::consts::SQRT_2,
        }
    }

    /// Certified count of intervals on which φ' is monotone.
    pub fn monotone_pieces(&self) -> usize {
        self.monotone_pieces
    }

    /// Certified sup-distance to the untruncated target function.
    pub fn perturbation(&self) -> f64 {
        self.perturbation
    }

    /// Cyclic total variation of φ₀' (finite for the affine kinds; for the
    /// cosine family TV(-s·sin) = 4|s|).
    pub fn residual_deriv_tv(&self) -> f64 {
        match &self.repr {
            Repr::Affine(pieces) => {
                let n = pieces.len();
                (0..n)
                    .map(|i| (pieces[(i + 1) % n].slope - pieces[i].slope).abs())
                    .sum()
            }
            Repr::Cos { scale } => 4.0 * scale.abs(),
        }
    }

    pub fn lip_cert(&self) -> Option<&(Modulus, f64)> {
        self.lip_cert.as_ref()
    }

    pub fn set_lip_cert(&mut self, m: Modulus, c: f64) {
        self.lip_cert = Some((m, c));
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    /// The phase φ + m·t (an exact metadata change).
    pub fn modulated(&self, m: i64) -> PhaseFn {
        let mut out = self.clone();
        out.int_slope += m;
        out.sup_deriv = out.residual_sup_deriv() + out.int_slope.unsigned_abs() as f64;
        out
    }

    /// Shortest piece length of the affine representation, if any.
    pub fn min_piece_len(&self) -> Option<f64> {
        self.pieces()
            .map(|ps| ps.iter().fold(f64::INFINITY, |m, p| m.min(p.x1 - p.x0)))
    }
}

fn piece_index(pieces: &[AffinePiece], t: f64) -> usize {
    let i = pieces.partition_point(|p| p.x0 <= t);
    i.saturating_sub(1)
}

/// Number of maximal intervals of [0, 2π] on which the slope sequence is
/// monotone. Equal adjacent slopes never break a run.
fn monotone_runs(pieces: &[AffinePiece]) -> usize {
    let mut runs = 1usize;
    let mut dir = 0i8;
    for w in pieces.windows(2) {
        let d = (w[1].slope - w[0].slope).partial_cmp(&0.0).unwrap() as i8;
        if d != 0 {
            if dir != 0 && d != dir {
                runs += 1;
            }
            dir = d;
        }
    }
    runs
}

/// Rebuild the y0 chain so adjacent pieces agree exactly, with φ₀(0) = 0.
fn rechain(pieces: &mut [AffinePiece]) {
    let mut y = 0.0;
    for p in pieces.iter_mut() {
        p.y0 = y;
        y += p.slope * (p.x1 - p.x0);
    }
}

/// φ(t) = m·t + t0.
pub fn linear_phase(m: i64, t0: f64) -> PhaseFn {
    let pieces = vec![AffinePiece {
        x0: 0.0,
        x1: TAU,
        slope: 0.0,
        y0: t0,
    }];
    let mut ph = PhaseFn::from_pieces(pieces, m, 0.0, "linear");
    ph.monotone_pieces = 1;
    ph
}

/// The C² benchmark φ(t) = cos t.
pub fn cos_phase() -> PhaseFn {
    PhaseFn {
        repr: Repr::Cos { scale: 1.0 },
        int_slope: 0,
        sup_deriv: 1.0,
        // φ' = -sin is monotone on two arcs of the circle
        monotone_pieces: 2,
        perturbation: 0.0,
        lip_cert: None,
        kind: "cos",
    }
}

/// Piecewise-linear phase through the given nodes. Breakpoints must be
/// strictly increasing and span [0, 2π]; the value list must be periodic.
pub fn pl_phase(breakpoints: &[f64], values: &[f64]) -> Result<PhaseFn> {
    if breakpoints.len() < 2 || breakpoints.len() != values.len() {
        return Err(CoreError::Domain(
            "need matching breakpoint/value lists with at least two nodes".into(),
        ));
    }
    if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::Domain(
            "breakpoints must be strictly increasing".into(),
        ));
    }
    if breakpoints[0].abs() > 1e-9 || (breakpoints[breakpoints.len() - 1] - TAU).abs() > 1e-9 {
        return Err(CoreError::Domain("breakpoints must span [0, 2π]".into()));
    }
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if (values[values.len() - 1] - values[0]).abs() > 1e-9 * scale {
        return Err(CoreError::Domain(
            "values must be periodic (first and last agree)".into(),
        ));
    }
    let n = breakpoints.len() - 1;
    let mut pieces = Vec::with_capacity(n);
    for i in 0..n {
        let x0 = if i == 0 { 0.0 } else { breakpoints[i] };
        let x1 = if i == n - 1 { TAU } else { breakpoints[i + 1] };
        let v1 = if i == n - 1 { values[0] } else { values[i + 1] };
        pieces.push(AffinePiece {
            x0,
            x1,
            slope: (v1 - values[i]) / (x1 - x0),
            y0: values[i],
        });
    }
    let mut ph = PhaseFn::from_pieces(pieces, 0, 0.0, "pl");
    // each affine piece is one interval of monotone (constant) derivative
    ph.monotone_pieces = n;
    Ok(ph)
}

// ψ-piece values for the staircase wave of a set with 2^L leaf intervals:
// leaf i carries the exact cell average of sin(2πσ) over σ in
// [i·2^{-L}, (i+1)·2^{-L}], the gap after leaf i carries sin(2π(i+1)·2^{-L}).
// All σ arguments are dyadic, so mirror values negate bit-exactly.
fn leaf_average(i: u64, level: u32, sinc: f64) -> f64 {
    let mid = (i as f64 + 0.5) * (-(level as f64)).exp2();
    sin2pi(mid) * sinc
}

fn gap_value(i: u64, level: u32) -> f64 {
    sin2pi((i + 1) as f64 * (-(level as f64)).exp2())
}

fn sinc_factor(level: u32) -> f64 {
    let x = PI * (-(level as f64)).exp2();
    x.sin() / x
}

/// Builds the (position, wave-value) pieces of ψ over the leaves and gaps of
/// the first `count` level-J intervals, with positions mapped by x ↦ a + x·s.
fn wave_pieces(
    cl: &CantorLevels,
    count: usize,
    level: u32,
    a: f64,
    b: f64,
    s: f64,
) -> Vec<AffinePiece> {
    let leaves = cl.cover(cl.depth()).expect("depth is built");
    let sinc = sinc_factor(level);
    let map = |x: f64| a + x * s;
    let sliver = (b - a) * 1e-12;
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let (l, r) = leaves[i];
        let x0 = if i == 0 { a } else { map(l) };
        out.push(AffinePiece {
            x0,
            x1: map(r),
            slope: leaf_average(i as u64, level, sinc),
            y0: 0.0,
        });
        let x1 = if i + 1 == count {
            b
        } else {
            map(leaves[i + 1].0)
        };
        // mapped endpoints can miss b by an ulp; never emit sliver pieces
        if x1 - map(r) > sliver {
            out.push(AffinePiece {
                x0: map(r),
                x1,
                slope: gap_value(i as u64, level),
                y0: 0.0,
            });
        }
    }
    out.last_mut().expect("nonempty").x1 = b;
    out
}

/// Primitive of the depth-J staircase wave: φ(t) = ∫₀ᵗ ψ, with
/// ψ = sin(2π·σ) averaged over each level-J interval.
///
/// Guarantees: φ(0) = φ(2π) = 0 (to the continuity tolerance), sup|φ'| ≤ 1,
/// φ' has exactly 3 monotone pieces, and the certified sup-distance to the
/// untruncated primitive is (4π² + 2π)·χ(ρ_J).
pub fn cantor_primitive(m: &Modulus, depth: u32) -> Result<PhaseFn> {
    if depth < 1 {
        return Err(CoreError::Domain("cantor primitive needs depth ≥ 1".into()));
    }
    let cl = build_levels(m, depth)?;
    let mut pieces = wave_pieces(&cl, 1usize << depth, depth, 0.0, TAU, 1.0);
    rechain(&mut pieces);
    let chi_leaf = m.chi(cl.rho(depth))?;
    let pert = (4.0 * PI * PI + TAU) * chi_leaf;
    Ok(PhaseFn::from_pieces(pieces, 0, pert, "cantor"))
}

/// The nested nowhere-linear phase: S_M = Σ_{m=1..M} ε_m f_m, where f_m is an
/// affine copy of the depth-(J-m) staircase-wave primitive squeezed into an
/// interval I_m placed concentrically in the currently largest gap.
///
/// Sizing: |I_m| = min(2^{-m}·ρ_m, |gap|/3), ties on gap length broken
/// leftmost. The weights w_m = ε_m·ρ_m/|I_m| telescope χ(ρ_{m+1})/χ(ρ_1)
/// differences normalized so that Σ w_m = 1 exactly at the built depth.
pub fn nested_phase(m: &Modulus, levels: u32, depth: u32) -> Result<(PhaseFn, NestedSchedule)> {
    if levels < 1 || depth < levels {
        return Err(CoreError::Domain(format!(
            "nested phase needs 1 ≤ M ≤ J, got M = {levels}, J = {depth}"
        )));
    }
    let cl = build_levels(m, depth)?;
    let rho: Vec<f64> = (0..=levels).map(|j| cl.rho(j)).collect();

    // raw residual weights d_j = χ(ρ_{j+1})/χ(ρ_1), normalized so the finite
    // schedule sums to one: delta_j = (d_j - d_M)/(d_0 - d_M)
    let chi1 = m.chi(cl.rho(1))?;
    let d: Vec<f64> = (0..=levels)
        .map(|j| Ok(m.chi(m.rho(j + 1)?)? / chi1))
        .collect::<Result<_>>()?;
    let denom = d[0] - d[levels as usize];
    let delta: Vec<f64> = d
        .iter()
        .map(|dj| (dj - d[levels as usize]) / denom)
        .collect();

    // complementary gaps of E, kept sorted by left endpoint
    let mut gaps: Vec<(f64, f64)> = cl.gaps(depth)?;
    let mut pieces = vec![AffinePiece {
        x0: 0.0,
        x1: TAU,
        slope: 0.0,
        y0: 0.0,
    }];
    let mut intervals = vec![(0.0, TAU)];
    let mut eps = vec![0.0_f64];
    let mut achieved = 0u32;
    let mut pert = 0.0_f64;

    for lvl in 1..=levels {
        // largest gap, leftmost on ties
        let Some(best) = gaps
            .iter()
            .enumerate()
            .max_by(|a, b| {
                let la = a.1 .1 - a.1 .0;
                let lb = b.1 .1 - b.1 .0;
                la.partial_cmp(&lb).unwrap().then(b.0.cmp(&a.0)) // earlier index wins ties
            })
            .map(|(i, _)| i)
        else {
            break;
        };
        let gap = gaps[best];
        let gap_len = gap.1 - gap.0;
        let size = (2.0_f64.powi(-(lvl as i32)) * rho[lvl as usize]).min(gap_len / 3.0);
        if size <= f64::EPSILON * TAU {
            break;
        }
        let center = 0.5 * (gap.0 + gap.1);
        let (a, b) = (center - 0.5 * size, center + 0.5 * size);
        let weight = delta[lvl as usize - 1] - delta[lvl as usize];
        let epsilon = weight * size / rho[lvl as usize];

        // f_lvl: staircase wave of E ∩ [0, ρ_lvl] mapped onto [a, b]
        let rel_level = depth - lvl;
        let leaf_count = 1usize << rel_level;
        let scale = size / rho[lvl as usize];
        let mut sub = wave_pieces(&cl, leaf_count, rel_level, a, b, scale);
        for p in sub.iter_mut() {
            p.slope *= weight;
        }

        // splice into the single affine piece covering [a, b]
        let host = piece_index(&pieces, a);
        let hp = pieces[host];
        assert!(
            hp.x0 <= a && b <= hp.x1,
            "host interval must lie inside one affine piece"
        );
        for p in sub.iter_mut() {
            p.slope += hp.slope;
        }
        let mut rebuilt = Vec::with_capacity(pieces.len() + sub.len() + 2);
        rebuilt.extend_from_slice(&pieces[..host]);
        if a > hp.x0 {
            rebuilt.push(AffinePiece {
                x0: hp.x0,
                x1: a,
                slope: hp.slope,
                y0: 0.0,
            });
        }
        rebuilt.extend_from_slice(&sub);
        if b < hp.x1 {
            rebuilt.push(AffinePiece {
                x0: b,
                x1: hp.x1,
                slope: hp.slope,
                y0: 0.0,
            });
        }
        rebuilt.extend_from_slice(&pieces[host + 1..]);
        pieces = rebuilt;

        // gap bookkeeping: remove the host gap, add the flanks and the
        // internal gaps of the placed copy
        let leaves = cl.cover(depth)?;
        let mut new_gaps = Vec::with_capacity(leaf_count + 1);
        new_gaps.push((gap.0, a));
        for i in 0..leaf_count - 1 {
            let r = a + leaves[i].1 * scale;
            let l = a + leaves[i + 1].0 * scale;
            new_gaps.push((r, l));
        }
        new_gaps.push((b, gap.1));
        gaps.splice(best..=best, new_gaps);

        intervals.push((a, b));
        eps.push(epsilon);
        pert += epsilon
            * (4.0 * PI * PI + TAU)
            * 2.0_f64.powi(lvl as i32 - depth as i32)
            * cl.rho(depth);
        achieved = lvl;
    }

    rechain(&mut pieces);
    let phase = PhaseFn::from_pieces(pieces, 0, pert, "nested");
    let schedule = NestedSchedule {
        levels: achieved,
        intervals,
        eps,
        delta: delta[..=achieved as usize].to_vec(),
        rho: rho[..=achieved as usize].to_vec(),
    };
    Ok((phase, schedule))
}

/// The circle diffeomorphism h(t) = t + ε·φ(t) for a periodic phase φ.
pub fn diffeo(phi: &PhaseFn, eps: f64) -> Result<PhaseFn> {
    if phi.winding() != 0 {
        return Err(CoreError::Precondition(
            "diffeo needs a periodic phase (winding 0)".into(),
        ));
    }
    if !(eps >= 0.0) || eps * phi.sup_deriv() >= 1.0 {
        return Err(CoreError::Precondition(format!(
            "need ε·sup|φ'| < 1, got ε = {eps}, sup|φ'| = {}",
            phi.sup_deriv()
        )));
    }
    let mut out = phi.clone();
    match &mut out.repr {
        Repr::Affine(pieces) => {
            for p in pieces.iter_mut() {
                p.slope *= eps;
                p.y0 *= eps;
            }
        }
        Repr::Cos { scale } => *scale *= eps,
    }
    out.int_slope = 1;
    out.sup_deriv = 1.0 + eps * phi.sup_deriv();
    out.perturbation = eps * phi.perturbation;
    out.kind = "diffeo";
    Ok(out)
}

/// Splits a circle map into (periodic part, winding): φ(t) = φ₀(t) + w·t.
pub fn lift(phi: &PhaseFn) -> (PhaseFn, i64) {
    let w = phi.int_slope;
    let mut out = phi.clone();
    out.int_slope = 0;
    out.sup_deriv = out.residual_sup_deriv();
    (out, w)
}

/// Sup-distance between φ and its secant over I, probed on the piece
/// breakpoints inside I plus a uniform grid. Zero iff φ is affine on I up to
/// the grid resolution.
pub fn chord_deviation(phi: &PhaseFn, interval: (f64, f64)) -> f64 {
    let (a, b) = interval;
    assert!(a < b && a >= -1e-12 && b <= TAU + 1e-12);
    let fa = phi.eval(a);
    let fb = phi.eval(b);
    let line = |t: f64| fa + (fb - fa) * (t - a) / (b - a);
    let mut worst = 0.0_f64;
    let mut probe = |t: f64| {
        let d = (phi.eval(t) - line(t)).abs();
        if d > worst {
            worst = d;
        }
    };
    if let Some(pieces) = phi.pieces() {
        for p in pieces {
            if p.x0 > a && p.x0 < b {
                probe(p.x0);
            }
        }
    }
    let n = 4096;
    for i in 0..=n {
        probe(a + (b - a) * i as f64 / n as f64);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn half() -> Modulus {
        Modulus::power(0.5).unwrap()
    }

    fn continuity_gap(phi: &PhaseFn) -> f64 {
        let pieces = phi.pieces().unwrap();
        pieces
            .windows(2)
            .map(|w| {
                let end = w[0].y0 + w[0].slope * (w[0].x1 - w[0].x0);
                (end - w[1].y0).abs()
            })
            .fold(0.0_f64, f64::max)
    }

    #[test]
    fn linear_phase_basics() {
        let id = linear_phase(1, 0.0);
        assert_eq!(id.winding(), 1);
        assert_relative_eq!(id.eval(1.3), 1.3);
        let c = linear_phase(0, 2.5);
        assert_relative_eq!(c.eval(4.0), 2.5);
        let double = linear_phase(2, PI);
        assert_relative_eq!(double.eval(TAU) - double.eval(0.0), 2.0 * TAU);
    }

    #[test]
    fn cos_phase_metadata() {
        let c = cos_phase();
        assert!(c.is_smooth());
        assert_eq!(c.sup_deriv(), 1.0);
        assert_eq!(c.monotone_pieces(), 2);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let d = c.deriv(TAU * i as f64 / 1000.0);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        assert_relative_eq!(lo, -1.0, epsilon = 1e-5);
        assert_relative_eq!(hi, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn tent_phase() {
        let tent = pl_phase(&[0.0, PI, TAU], &[0.0, 1.0, 0.0]).unwrap();
        let slopes: Vec<f64> = tent.pieces().unwrap().iter().map(|p| p.slope).collect();
        assert_relative_eq!(slopes[0], 1.0 / PI, epsilon = 1e-15);
        assert_relative_eq!(slopes[1], -1.0 / PI, epsilon = 1e-15);
        assert_eq!(tent.winding(), 0);
        assert_eq!(tent.monotone_pieces(), 2);
        let flat = pl_phase(&[0.0, PI, TAU], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(chord_deviation(&flat, (0.0, TAU)), 0.0);
        assert!(pl_phase(&[0.0, 4.0, 3.0, TAU], &[0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(pl_phase(&[0.0, PI, TAU], &[0.0, 1.0, 0.5]).is_err());
    }

    #[test]
    fn cantor_primitive_contract() {
        let phi = cantor_primitive(&half(), 8).unwrap();
        assert_eq!(phi.winding(), 0);
        assert!(phi.sup_deriv() <= 1.0);
        assert_eq!(phi.monotone_pieces(), 3);
        assert!(phi.eval(0.0).abs() < 1e-13);
        assert!(phi.eval(TAU).abs() < 1e-12, "φ(2π) = {}", phi.eval(TAU));
        assert!(continuity_gap(&phi) <= 1e-12 * phi.sup_deriv().max(1e-30));
        // ψ vanishes on the central gap, so φ is affine there with slope 0
        let cl = build_levels(&half(), 8).unwrap();
        let g = cl.gaps(1).unwrap()[0];
        assert_eq!(chord_deviation(&phi, (g.0 + 0.1, g.1 - 0.1)), 0.0);
        // max |ψ| = 1 is attained on the σ = 1/4 gap
        assert_eq!(phi.residual_sup_deriv(), 1.0);
        // certified truncation distance
        let m = half();
        let expected = (4.0 * PI * PI + TAU) * m.chi(m.rho(8).unwrap()).unwrap();
        assert_relative_eq!(phi.perturbation(), expected, max_relative = 1e-12);
    }

    #[test]
    fn cantor_primitive_wave_mean_zero() {
        let phi = cantor_primitive(&half(), 10).unwrap();
        let total: f64 = phi
            .pieces()
            .unwrap()
            .iter()
            .map(|p| p.slope * (p.x1 - p.x0))
            .sum();
        assert!(total.abs() < 1e-12, "∫ψ = {total}");
    }

    #[test]
    fn cantor_mirror_symmetry_of_slopes() {
        let phi = cantor_primitive(&half(), 7).unwrap();
        let pieces = phi.pieces().unwrap();
        let n = pieces.len();
        for i in 0..n {
            assert_eq!(
                pieces[i].slope,
                -pieces[n - 1 - i].slope,
                "piece {i} of {n}"
            );
        }
    }

    #[test]
    fn nested_schedule_invariants() {
        let m = half();
        let (phi, sched) = nested_phase(&m, 5, 9).unwrap();
        assert_eq!(sched.levels, 5);
        // |I_m| ≤ 2^{-m} ρ_m
        for lvl in 1..=5usize {
            let (a, b) = sched.intervals[lvl];
            assert!(b - a <= 2.0_f64.powi(-(lvl as i32)) * sched.rho[lvl] * (1.0 + 1e-12));
        }
        // Σ ε_m ρ_m/|I_m| = 1
        let total: f64 = (1..=5usize)
            .map(|lvl| {
                let (a, b) = sched.intervals[lvl];
                sched.eps[lvl] * sched.rho[lvl] / (b - a)
            })
            .sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        // δ_j = Σ_{m>j} ε_m ρ_m/|I_m|, non-increasing
        for j in 0..=5usize {
            let tail: f64 = (j + 1..=5usize)
                .map(|lvl| {
                    let (a, b) = sched.intervals[lvl];
                    sched.eps[lvl] * sched.rho[lvl] / (b - a)
                })
                .sum();
            assert_relative_eq!(sched.delta[j], tail, epsilon = 1e-10);
            if j > 0 {
                assert!(sched.delta[j] <= sched.delta[j - 1] + 1e-15);
            }
        }
        assert!(phi.sup_deriv() <= 1.0 + 1e-12);
        assert!(phi.monotone_pieces() <= 4 * 5 + 3);
        assert!(continuity_gap(&phi) <= 1e-12);
    }

    #[test]
    fn nested_partial_sums_telescope() {
        let m = half();
        let (s2, sched2) = nested_phase(&m, 2, 8).unwrap();
        let (s3, sched3) = nested_phase(&m, 3, 8).unwrap();
        // same placement up to the shared level
        for lvl in 0..=2usize {
            assert_eq!(sched2.intervals[lvl], sched3.intervals[lvl]);
        }
        // the finite schedules are normalized by different level budgets;
        // after aligning them, S_3 - κ·S_2 is exactly the level-3 term:
        // supported in I_3 and vanishing at its endpoints
        let d = |j: u32| m.chi(m.rho(j + 1).unwrap()).unwrap() / m.chi(m.rho(1).unwrap()).unwrap();
        let kappa = (d(0) - d(2)) / (d(0) - d(3));
        let (a, b) = sched3.intervals[3];
        let diff = |t: f64| s3.eval(t) - kappa * s2.eval(t);
        for i in 0..=400 {
            let t = TAU * i as f64 / 400.0;
            if t < a - 1e-9 || t > b + 1e-9 {
                assert!(diff(t).abs() < 1e-12, "t = {t}, diff = {}", diff(t));
            }
        }
        assert!(diff(a).abs() < 1e-12 && diff(b).abs() < 1e-12);
        // interior deviation witnesses the extra level
        let interior: f64 = (1..32)
            .map(|i| diff(a + (b - a) * i as f64 / 32.0).abs())
            .fold(0.0, f64::max);
        assert!(interior > 0.0);
    }

    #[test]
    fn nested_chord_deviation_positive_on_every_level() {
        let (phi, sched) = nested_phase(&half(), 4, 8).unwrap();
        for lvl in 0..=4usize {
            let dev = chord_deviation(&phi, sched.intervals[lvl]);
            assert!(dev > 0.0, "level {lvl} deviation {dev}");
        }
    }

    #[test]
    fn diffeo_contract() {
        let base = cantor_primitive(&half(), 6).unwrap();
        let h = diffeo(&base, 0.5).unwrap();
        assert_eq!(h.winding(), 1);
        for p in h.pieces().unwrap() {
            let total = 1.0 + p.slope;
            assert!(total > 0.5 - 1e-12 && total < 1.5 + 1e-12);
        }
        assert_relative_eq!(h.eval(TAU) - h.eval(0.0), TAU, epsilon = 1e-10);
        let id = diffeo(&base, 0.0).unwrap();
        for i in 0..=100 {
            let t = TAU * i as f64 / 100.0;
            assert_relative_eq!(id.eval(t), t, epsilon = 1e-12);
        }
        assert!(diffeo(&base, 1.0).is_err());
        assert!(diffeo(&linear_phase(1, 0.0), 0.1).is_err());
    }

    #[test]
    fn lift_reconstruction() {
        let (zero, w) = lift(&linear_phase(3, 0.0));
        assert_eq!(w, 3);
        assert_eq!(zero.winding(), 0);
        for i in 0..=50 {
            let t = TAU * i as f64 / 50.0;
            assert!(zero.eval(t).abs() < 1e-15);
        }
        let base = cantor_primitive(&half(), 5).unwrap();
        let h = diffeo(&base, 0.25).unwrap();
        let (residual, w) = lift(&h);
        assert_eq!(w, 1);
        for i in 0..=200 {
            let t = TAU * i as f64 / 200.0;
            assert_relative_eq!(
                residual.eval(t) + t,
                h.eval(t),
                epsilon = 1e-12,
                max_relative = 1e-12
            );
            assert_relative_eq!(residual.eval(t), 0.25 * base.eval(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn chord_deviation_examples() {
        let lin = linear_phase(2, 0.7);
        assert!(chord_deviation(&lin, (0.3, 4.1)) < 1e-12);
        let tent = pl_phase(&[0.0, PI, TAU], &[0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(chord_deviation(&tent, (0.0, TAU)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn modulation_changes_only_integer_part() {
        let tent = pl_phase(&[0.0, PI, TAU], &[0.0, 1.0, 0.0]).unwrap();
        let shifted = tent.modulated(3);
        assert_eq!(shifted.winding(), 3);
        for i in 0..=100 {
            let t = TAU * i as f64 / 100.0;
            assert_relative_eq!(shifted.eval(t), tent.eval(t) + 3.0 * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn sup_deriv_dominates_slopes() {
        for phi in [
            pl_phase(&[0.0, 1.0, 4.0, TAU], &[0.0, 0.5, -0.2, 0.0]).unwrap(),
            cantor_primitive(&half(), 6).unwrap(),
            nested_phase(&half(), 3, 7).unwrap().0,
        ] {
            let max_slope = phi
                .pieces()
                .unwrap()
                .iter()
                .fold(0.0_f64, |m, p| m.max(p.slope.abs()));
            assert!(phi.sup_deriv() >= max_slope);
        }
    }
}
