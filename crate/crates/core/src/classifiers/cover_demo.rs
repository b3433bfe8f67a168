//! Step-by-step replay of the sphere-covering argument on a thin group.
//!
//! With `ρ = (2a+1)^(n+2)`: gl-partition every sphere `S(γ_m, ρ)` along the
//! axis, check the partitions are similar with a common scale `D`, and verify
//! that `B(γ_0, 39D)` is covered by `⋃_{|i| ≤ 40D} S(γ_i, D)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::cayley::{build_axis, explore, sphere_counts, UNREACHED};
use crate::error::{Error, Result};
use crate::gl_partition::{
    build_gl_partition, similar_partitions, sphere_as_metric_space, FiniteMetricSpace, GlPartition,
};
use crate::group::{GroupOracle, GroupSpec};

use super::{criterion_radius, CRITERION_MIN_A};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoStatus {
    Completed,
    /// `|S(ρ)| > n`: the hypothesis does not hold, nothing to demonstrate.
    Declined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SphereStep {
    /// Axis indices `m` whose spheres `S(γ_m, ρ)` were partitioned.
    pub index_range: (i64, i64),
    pub spheres: usize,
    pub points_per_sphere: Vec<usize>,
    pub all_nontrivial: bool,
    pub all_pairwise_similar: bool,
    pub common_scale: bool,
    pub blocks_per_sphere: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LandingStep {
    /// Every `x` in the ball has some `m` in range with `d(x, γ_m) = ρ`.
    pub every_point_on_a_sphere: bool,
    /// For each such `m`, `x` lies in the block of `S(γ_m, ρ)` containing `γ_{m+ρ}`.
    pub in_axis_block: bool,
    /// ... and `d(x, γ_{m+ρ}) ≤ D`.
    pub within_scale_of_axis: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoveringStep {
    pub ball_radius: u64,
    pub index_range: (i64, i64),
    pub ball_size: usize,
    pub uncovered: Vec<String>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub group: GroupSpec,
    pub a: u32,
    pub n: u32,
    pub rho: u64,
    pub sphere_size: usize,
    pub hypothesis_met: bool,
    pub status: DemoStatus,
    pub scale: Option<u64>,
    pub spheres: Option<SphereStep>,
    /// `ρ > a·D`.
    pub rho_exceeds_a_scale: Option<bool>,
    pub landing: Option<LandingStep>,
    pub covering: Option<CoveringStep>,
    pub all_checks_pass: bool,
    pub notes: Vec<String>,
}

/// Runs the covering demonstration. Declines (without error) when
/// `|S(ρ)| > n`.
pub fn sphere_cover_demo(oracle: &GroupOracle, a: u32, n: u32, budget: usize) -> Result<DemoReport> {
    if a < 3 || n < 2 {
        return Err(Error::InvalidParameter(format!("demo needs a >= 3 and n >= 2 (got a = {a}, n = {n})")));
    }
    let rho = criterion_radius(a, n)
        .filter(|&r| r <= u32::MAX as u64 / 8)
        .ok_or_else(|| Error::Infeasible("radius (2a+1)^(n+2) is out of range".into()))?;
    let infeasible = |e: Error| match e {
        Error::BudgetExceeded { budget, radius_reached } => Error::Infeasible(format!(
            "node budget of {budget} exhausted at radius {radius_reached} (sphere radius {rho})"
        )),
        other => other,
    };
    let sphere_size = sphere_counts(oracle, rho as u32, budget).map_err(infeasible)?.sizes[rho as usize];
    let mut notes = Vec::new();
    if a < CRITERION_MIN_A {
        notes.push(format!("demonstration only: hypothesis a >= {CRITERION_MIN_A} violated (a < 100, a = {a})"));
    }
    let mut report = DemoReport {
        group: oracle.spec().clone(),
        a,
        n,
        rho,
        sphere_size,
        hypothesis_met: sphere_size <= n as usize,
        status: DemoStatus::Declined,
        scale: None,
        spheres: None,
        rho_exceeds_a_scale: None,
        landing: None,
        covering: None,
        all_checks_pass: false,
        notes,
    };
    if !report.hypothesis_met {
        report.notes.push(format!("hypothesis not met: |S({rho})| = {sphere_size} > n = {n}"));
        return Ok(report);
    }

    // Scale D from the sphere around the identity.
    let rho32 = rho as u32;
    let table0 = explore(oracle, 3 * rho32, budget).map_err(infeasible)?;
    let s0 = sphere_as_metric_space(oracle, &table0, &oracle.identity(), rho32)?;
    let p0 = build_gl_partition(&s0, a)?;
    if p0.trivial {
        return Err(Error::TrivialPartition(format!("gl-partition of S(e, {rho}) is a single block")));
    }
    let d = p0.scale;
    drop(table0);

    let reach = 40 * d + rho;
    let horizon = u32::try_from(reach + 3 * rho)
        .map_err(|_| Error::Infeasible(format!("radius {} is out of range", reach + 3 * rho)))?;
    let table = explore(oracle, horizon, budget).map_err(infeasible)?;
    let axis = build_axis(oracle, &table, reach as u32)?;

    let (lo, hi) = (-(reach as i64), 40 * d as i64 - rho as i64);
    let spheres: Vec<(FiniteMetricSpace<u64>, GlPartition<u64>)> = (lo..=hi)
        .into_par_iter()
        .map(|m| {
            let s = sphere_as_metric_space(oracle, &table, axis.vertex(m), rho32)?;
            let p = build_gl_partition(&s, a)?;
            Ok((s, p))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(pos) = spheres.iter().position(|(_, p)| p.trivial) {
        return Err(Error::TrivialPartition(format!(
            "gl-partition of S(γ_{}, {rho}) is a single block",
            lo + pos as i64
        )));
    }
    let mut all_similar = similar_partitions(&p0, &s0, &spheres[0].1, &spheres[0].0)?;
    for i in 0..spheres.len() {
        for j in i + 1..spheres.len() {
            if !all_similar {
                break;
            }
            all_similar = similar_partitions(&spheres[i].1, &spheres[i].0, &spheres[j].1, &spheres[j].0)?;
        }
    }
    report.spheres = Some(SphereStep {
        index_range: (lo, hi),
        spheres: spheres.len(),
        points_per_sphere: {
            let mut v: Vec<usize> = spheres.iter().map(|(s, _)| s.len()).collect();
            v.dedup();
            v
        },
        all_nontrivial: true,
        all_pairwise_similar: all_similar,
        common_scale: spheres.iter().all(|(_, p)| p.scale == d),
        blocks_per_sphere: p0.blocks.len(),
    });
    report.scale = Some(d);
    report.rho_exceeds_a_scale = Some(rho > a as u64 * d);

    // Every x in B(γ_0, 39D) sits on some S(γ_m, ρ), inside the block through γ_{m+ρ}.
    let ball: Vec<usize> = (0..table.ball_size((39 * d) as u32)).collect();
    let landing: Vec<(bool, bool, bool)> = ball
        .par_iter()
        .map(|&x| {
            let dist = table.distances_from(x, None);
            let mut on_sphere = false;
            let mut in_block = true;
            let mut near_axis = true;
            for m in lo..=hi {
                if dist[axis.table_index(m)] as u64 != rho {
                    continue;
                }
                on_sphere = true;
                let (space, part) = &spheres[(m - lo) as usize];
                let x_label = table.element(x).to_string();
                let anchor = axis.vertex(m + rho as i64).to_string();
                let block = part.blocks.iter().find(|b| b.contains(&anchor));
                in_block &= block.is_some_and(|b| b.contains(&x_label)) && space.index_of(&x_label).is_some();
                let to_anchor = dist[axis.table_index(m + rho as i64)];
                near_axis &= to_anchor != UNREACHED && to_anchor as u64 <= d;
            }
            (on_sphere, on_sphere && in_block, on_sphere && near_axis)
        })
        .collect();
    report.landing = Some(LandingStep {
        every_point_on_a_sphere: landing.iter().all(|l| l.0),
        in_axis_block: landing.iter().all(|l| l.1),
        within_scale_of_axis: landing.iter().all(|l| l.2),
    });

    // B(γ_0, 39D) ⊆ ⋃_{|i| ≤ 40D} S(γ_i, D)
    let span = 40 * d as i64;
    let mut covered = vec![false; table.len()];
    for i in -span..=span {
        let dist = table.distances_from(axis.table_index(i), Some(d as u32));
        for (v, &dv) in dist.iter().enumerate() {
            if dv as u64 == d {
                covered[v] = true;
            }
        }
    }
    let uncovered: Vec<String> = ball.iter().filter(|&&x| !covered[x]).map(|&x| table.element(x).to_string()).collect();
    report.covering = Some(CoveringStep {
        ball_radius: 39 * d,
        index_range: (-span, span),
        ball_size: ball.len(),
        holds: uncovered.is_empty(),
        uncovered,
    });

    let s = report.spheres.as_ref().unwrap();
    let l = report.landing.as_ref().unwrap();
    report.all_checks_pass = s.all_nontrivial
        && s.all_pairwise_similar
        && s.common_scale
        && report.rho_exceeds_a_scale == Some(true)
        && l.every_point_on_a_sphere
        && l.in_axis_block
        && l.within_scale_of_axis
        && report.covering.as_ref().unwrap().holds;
    report.status = DemoStatus::Completed;
    Ok(report)
}
