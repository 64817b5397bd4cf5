//! The symmetric perfect set E on [0, 2π] and its staircase function σ.
//!
//! Level j consists of 2^j closed intervals of length ρ_j (where ω(ρ_j) =
//! 2^{-j}), placed at both ends of each level-(j-1) interval. σ is the
//! non-decreasing function that is constant on the complementary gaps and
//! gains 2^{-j} across each level-j interval; below the truncation depth J
//! it is interpolated linearly, so the uniform truncation error is ≤ 2^{-J}.
//!
//! Construction builds the left half of every level and mirrors the right
//! half about π, and evaluation reflects arguments t > π through the exact
//! subtraction 2π - t, so σ(t) + σ(2π - t) = 1 holds exactly in floating
//! point.

use crate::error::{CoreError, Result};
use crate::modulus::Modulus;
use crate::util::{reduce_mod_tau, sin2pi};
use std::f64::consts::{PI, TAU};

/// The set E truncated at depth J, as interval lists per level, plus the
/// staircase node values at the level-J interval endpoints.
#[derive(Debug, Clone)]
pub struct CantorLevels {
    modulus: Modulus,
    depth: u32,
    /// rho[j] = ρ_j for j = 0..=J.
    rho: Vec<f64>,
    /// levels[j] = sorted (left, right) endpoints of the 2^j level-j intervals.
    levels: Vec<Vec<(f64, f64)>>,
    /// σ at the 2^J + 1 level-J endpoint grid: node i carries i·2^{-J}.
    staircase_nodes: Vec<f64>,
}

/// Maximum accepted truncation depth. Memory grows like 2^J.
pub const MAX_DEPTH: u32 = 40;

/// Builds the level structure of E for the given modulus.
///
/// Fails if the strict doubling chain 2ρ_{j+1} < ρ_j is violated at any
/// probed scale (the error names the scale).
pub fn build_levels(m: &Modulus, depth: u32) -> Result<CantorLevels> {
    if depth > MAX_DEPTH {
        return Err(CoreError::Domain(format!(
            "depth {depth} exceeds the supported maximum {MAX_DEPTH}"
        )));
    }
    let mut rho = Vec::with_capacity(depth as usize + 1);
    for j in 0..=depth {
        rho.push(m.rho(j)?);
    }
    for j in 0..depth as usize {
        if !(2.0 * rho[j + 1] < rho[j]) {
            return Err(CoreError::Construction(format!(
                "strict doubling fails at level {j}: 2ρ_{} = {:.6e} is not below ρ_{j} = {:.6e}",
                j + 1,
                2.0 * rho[j + 1],
                rho[j]
            )));
        }
    }

    // Left-half lefts per level; the right half is the mirror image.
    let mut levels: Vec<Vec<(f64, f64)>> = Vec::with_capacity(depth as usize + 1);
    levels.push(vec![(0.0, TAU)]);
    let mut half: Vec<f64> = vec![0.0]; // lefts of level-1 intervals in [0, π)
    for j in 1..=depth as usize {
        let len = rho[j];
        let mut full: Vec<(f64, f64)> = Vec::with_capacity(1 << j);
        for &l in &half {
            full.push((l, l + len));
        }
        for &l in half.iter().rev() {
            full.push((TAU - (l + len), TAU - l));
        }
        levels.push(full);
        if j < depth as usize {
            // children of [L, L+ρ_j]: [L, L+ρ_{j+1}] and [L+ρ_j-ρ_{j+1}, L+ρ_j]
            let shift = rho[j] - rho[j + 1];
            let mut next = Vec::with_capacity(half.len() * 2);
            for &l in &half {
                next.push(l);
                next.push(l + shift);
            }
            half = next;
        }
    }

    let n = 1usize << depth;
    let step = (-(depth as f64)).exp2();
    let staircase_nodes = (0..=n).map(|i| i as f64 * step).collect();

    Ok(CantorLevels {
        modulus: m.clone(),
        depth,
        rho,
        levels,
        staircase_nodes,
    })
}

impl CantorLevels {
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn rho(&self, j: u32) -> f64 {
        self.rho[j as usize]
    }

    pub fn staircase_nodes(&self) -> &[f64] {
        &self.staircase_nodes
    }

    /// The 2^j closed level-j intervals covering E.
    pub fn cover(&self, j: u32) -> Result<&[(f64, f64)]> {
        if j > self.depth {
            return Err(CoreError::Domain(format!(
                "level {j} exceeds built depth {}",
                self.depth
            )));
        }
        Ok(&self.levels[j as usize])
    }

    /// The 2^j - 1 open intervals complementary to the level-j cover.
    pub fn gaps(&self, j: u32) -> Result<Vec<(f64, f64)>> {
        let cover = self.cover(j)?;
        Ok(cover.windows(2).map(|w| (w[0].1, w[1].0)).collect())
    }

    /// σ(t): exact dyadic value on every gap of depth ≤ J, linear inside the
    /// level-J intervals. σ(0) = 0 and σ(2π) = 1; arguments outside [0, 2π]
    /// are reduced mod 2π.
    pub fn staircase(&self, t: f64) -> f64 {
        let t = if (0.0..=TAU).contains(&t) {
            t
        } else {
            reduce_mod_tau(t)
        };
        if t > PI {
            // 2π - t is exact here (Sterbenz), and 1 - x + x rounds to 1
            1.0 - self.staircase_left(TAU - t)
        } else {
            self.staircase_left(t)
        }
    }

    // σ on [0, π], walking down the left-half tree.
    fn staircase_left(&self, t: f64) -> f64 {
        debug_assert!((0.0..=PI).contains(&t));
        let mut left = 0.0_f64;
        let mut index = 0u64; // interval index at the current level
        for j in 0..self.depth as usize {
            let child_len = self.rho[j + 1];
            let shift = self.rho[j] - child_len;
            if t <= left + child_len {
                index *= 2;
            } else if t >= left + shift {
                index = index * 2 + 1;
                left += shift;
            } else {
                // gap between the two children: σ = (2·index + 1)·2^{-(j+1)}
                return (2 * index + 1) as f64 * (-((j + 1) as f64)).exp2();
            }
        }
        let step = (-(self.depth as f64)).exp2();
        let frac = ((t - left) / self.rho[self.depth as usize]).clamp(0.0, 1.0);
        (index as f64 + frac) * step
    }

    /// The staircase wave ψ(t) = sin(2π·σ(t)): constant on gaps, mean zero by
    /// the mirror symmetry, with |ψ| ≤ 1 and maximum 1 on the σ = 1/4 gap.
    pub fn staircase_wave(&self, t: f64) -> f64 {
        sin2pi(self.staircase(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn half() -> Modulus {
        Modulus::power(0.5).unwrap()
    }

    #[test]
    fn level_one_placement() {
        let cl = build_levels(&half(), 1).unwrap();
        let c = cl.cover(1).unwrap();
        assert_eq!(c.len(), 2);
        assert_relative_eq!(c[0].0, 0.0);
        assert_relative_eq!(c[0].1, TAU / 4.0, max_relative = 1e-10);
        assert_relative_eq!(c[1].0, TAU - TAU / 4.0, max_relative = 1e-10);
        assert_eq!(c[1].1, TAU);
        let g = cl.gaps(1).unwrap();
        assert_eq!(g.len(), 1);
        assert_relative_eq!(g[0].0, PI / 2.0, max_relative = 1e-10);
        assert_relative_eq!(g[0].1, 3.0 * PI / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn middle_thirds_endpoints() {
        // ω(δ) = (δ/2π)^{log2/log3} gives ρ_j = 2π·3^{-j}
        let m = Modulus::power(2.0_f64.ln() / 3.0_f64.ln()).unwrap();
        let cl = build_levels(&m, 2).unwrap();
        let c = cl.cover(2).unwrap();
        let expected: [(f64, f64); 4] = [
            (0.0, TAU / 9.0),
            (2.0 * TAU / 9.0, 3.0 * TAU / 9.0),
            (6.0 * TAU / 9.0, 7.0 * TAU / 9.0),
            (8.0 * TAU / 9.0, TAU),
        ];
        for (got, want) in c.iter().zip(expected.iter()) {
            assert_relative_eq!(got.0, want.0, max_relative = 1e-9, epsilon = 1e-12);
            assert_relative_eq!(got.1, want.1, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn depth_zero_is_whole_circle() {
        let cl = build_levels(&half(), 0).unwrap();
        assert_eq!(cl.cover(0).unwrap(), &[(0.0, TAU)]);
        assert!(cl.gaps(0).unwrap().is_empty());
        assert!(cl.cover(1).is_err());
    }

    #[test]
    fn alpha_one_rejected_by_construction() {
        // ρ halves exactly each level, so 2ρ_{j+1} = ρ_j: strictness fails
        let m = Modulus::power(1.0).unwrap();
        let e = build_levels(&m, 3).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("strict doubling"), "{msg}");
    }

    #[test]
    fn cover_measure_and_gap_count() {
        let cl = build_levels(&half(), 6).unwrap();
        for j in 1..=3u32 {
            let cover = cl.cover(j).unwrap();
            let measure: f64 = cover.iter().map(|&(a, b)| b - a).sum();
            assert_relative_eq!(measure, (1u64 << j) as f64 * cl.rho(j), max_relative = 1e-9);
            assert_eq!(cl.gaps(j).unwrap().len(), (1usize << j) - 1);
        }
    }

    #[test]
    fn nesting_of_levels() {
        let cl = build_levels(&half(), 8).unwrap();
        for j in 0..8u32 {
            let outer = cl.cover(j).unwrap();
            for &(a, b) in cl.cover(j + 1).unwrap() {
                assert!(
                    outer
                        .iter()
                        .any(|&(oa, ob)| oa <= a + 1e-12 && b <= ob + 1e-12),
                    "level {} interval [{a}, {b}] not nested",
                    j + 1
                );
            }
        }
    }

    #[test]
    fn mirror_configuration_exact() {
        let cl = build_levels(&half(), 7).unwrap();
        for j in 1..=7u32 {
            let c = cl.cover(j).unwrap();
            let n = c.len();
            // right-half intervals are stored as exact float mirrors of the left
            for i in 0..n / 2 {
                let (a, _b) = c[i];
                let (ma, mb) = c[n - 1 - i];
                assert_eq!(mb, TAU - a);
                assert_eq!(ma, TAU - (a + cl.rho(j)));
            }
        }
    }

    #[test]
    fn staircase_node_grid() {
        let cl = build_levels(&half(), 5).unwrap();
        let nodes = cl.staircase_nodes();
        assert_eq!(nodes.len(), 33);
        for (i, &v) in nodes.iter().enumerate() {
            assert_eq!(v, i as f64 / 32.0);
        }
        // node values are attained at the level-J interval endpoints
        let (l, r) = cl.cover(5).unwrap()[3];
        assert_eq!(cl.staircase(l), nodes[3]);
        assert_eq!(cl.staircase(r), nodes[4]);
    }

    #[test]
    fn staircase_endpoint_and_gap_values() {
        let cl = build_levels(&half(), 6).unwrap();
        assert_eq!(cl.staircase(0.0), 0.0);
        assert_eq!(cl.staircase(TAU), 1.0);
        assert_eq!(cl.staircase(TAU + 0.1), cl.staircase(0.1)); // reduced mod 2π
        assert_eq!(cl.staircase(PI), 0.5); // central gap
                                           // second-level leftmost gap carries 1/4
        let g = cl.gaps(2).unwrap();
        let t = 0.5 * (g[0].0 + g[0].1);
        assert_eq!(cl.staircase(t), 0.25);
    }

    #[test]
    fn staircase_symmetry_exact() {
        let cl = build_levels(&half(), 9).unwrap();
        // t in [π, 2π]: 2π - t is exact, so each mirror pair is exercised
        let mut state = 0x9e3779b97f4a7c15_u64;
        for _ in 0..1000 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let t = PI + u * PI;
            let s = cl.staircase(t) + cl.staircase(TAU - t);
            assert_eq!(s, 1.0, "t = {t}");
        }
    }

    #[test]
    fn staircase_monotone() {
        let cl = build_levels(&half(), 8).unwrap();
        let mut prev = 0.0;
        for i in 0..=20000 {
            let t = TAU * i as f64 / 20000.0;
            let s = cl.staircase(t);
            assert!(s + 1e-15 >= prev, "t={t}");
            prev = s;
        }
    }

    #[test]
    fn staircase_lip_omega_discrete() {
        // gain across a window of width ρ_j is at most 2·ω(ρ_j)
        let m = half();
        let cl = build_levels(&m, 10).unwrap();
        for j in 1..=10u32 {
            let delta = cl.rho(j);
            let bound = 2.0 * m.omega(delta).unwrap();
            let mut worst = 0.0_f64;
            for i in 0..4000 {
                let t = (TAU - delta) * i as f64 / 4000.0;
                let osc = cl.staircase(t + delta) - cl.staircase(t);
                worst = worst.max(osc);
            }
            assert!(
                worst <= bound * (1.0 + 1e-9),
                "level {j}: osc {worst} > {bound}"
            );
        }
    }

    #[test]
    fn wave_values() {
        let cl = build_levels(&half(), 6).unwrap();
        assert_eq!(cl.staircase_wave(PI), 0.0); // σ = 1/2 on the central gap
        let g = cl.gaps(2).unwrap();
        let t = 0.5 * (g[0].0 + g[0].1);
        assert_eq!(cl.staircase_wave(t), 1.0); // σ = 1/4
        assert_eq!(cl.staircase_wave(0.0), 0.0);
    }
}
