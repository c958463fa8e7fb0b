//! Equal-budget coverings of the torus by centred cubes, Besicovitch family
//! selection, and post-hoc verification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::TorusCube;
use crate::error::{Error, Result};
use crate::grid::{Domain, SampledFunction};
use crate::orlicz::{field_llogl_norm, j_cube};

/// Default relative tolerance on per-cube budgets.
pub const DEFAULT_TOL: f64 = 1e-3;

/// Side length found for one centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeBudget {
    pub side: f64,
    pub j_value: f64,
    /// The whole torus was reached without meeting the target.
    pub saturated: bool,
}

/// Smallest side (within `tol`) of the cube centred at `x` whose budget
/// reaches `target`.
///
/// `J` is continuous and nondecreasing in the side, so bisection keeps
/// `J(lo) < target ≤ J(hi)` and stops once `J(hi)` is within `tol / 4`.
pub fn cube_radius_for_budget(f: &SampledFunction, x: &[f64], target: f64, tol: f64) -> Result<CubeBudget> {
    check_torus(f)?;
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    if !(target > 0.0) {
        return Err(Error::InvalidInput(format!("budget target {target} must be positive")));
    }
    let j_at = |side: f64| j_cube(f, &TorusCube::new(x.to_vec(), side).expect("side in (0, 1]"));
    let full = j_at(1.0);
    if full < target {
        return Ok(CubeBudget { side: 1.0, j_value: full, saturated: true });
    }
    let (mut lo, mut hi, mut j_hi) = (0.0, 1.0, full);
    for _ in 0..200 {
        if j_hi <= target * (1.0 + 0.25 * tol) || hi - lo <= 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let j = j_at(mid);
        if j >= target {
            hi = mid;
            j_hi = j;
        } else {
            lo = mid;
        }
    }
    Ok(CubeBudget { side: hi, j_value: j_hi, saturated: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covering {
    pub cubes: Vec<TorusCube>,
    pub j_values: Vec<f64>,
    pub saturated: Vec<bool>,
    pub target: f64,
    pub tol: f64,
    pub families: Vec<Vec<usize>>,
}

/// One entry of the serialised covering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringEntry {
    pub center: Vec<f64>,
    pub side: f64,
    pub j_value: f64,
    pub family: usize,
}

impl Covering {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn entries(&self) -> Vec<CoveringEntry> {
        let mut family = vec![0; self.cubes.len()];
        for (fi, fam) in self.families.iter().enumerate() {
            for &i in fam {
                family[i] = fi;
            }
        }
        self.cubes
            .iter()
            .zip(&self.j_values)
            .zip(family)
            .map(|((c, &j), family)| CoveringEntry { center: c.center.clone(), side: c.side, j_value: j, family })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.entries())?)
    }

    /// Rebuilds a covering from its serialised entries. Budget metadata that
    /// the format does not carry (target, saturation) is reconstructed
    /// against `f` and `n`.
    pub fn from_entries(entries: Vec<CoveringEntry>, f: &SampledFunction, n: usize) -> Result<Self> {
        let cubes = entries.iter().map(|e| TorusCube::new(e.center.clone(), e.side)).collect::<Result<Vec<_>>>()?;
        let nfam = entries.iter().map(|e| e.family + 1).max().unwrap_or(0);
        let mut families = vec![Vec::new(); nfam];
        for (i, e) in entries.iter().enumerate() {
            families[e.family].push(i);
        }
        let target = field_llogl_norm(f) / n.max(1) as f64;
        let tol = DEFAULT_TOL;
        let saturated = entries.iter().map(|e| e.side >= 1.0 && e.j_value < target * (1.0 - tol)).collect();
        Ok(Self { cubes, j_values: entries.iter().map(|e| e.j_value).collect(), saturated, target, tol, families })
    }

    pub fn from_json(s: &str, f: &SampledFunction, n: usize) -> Result<Self> {
        let entries: Vec<CoveringEntry> = serde_json::from_str(s)?;
        Self::from_entries(entries, f, n)
    }

    /// Number of cubes containing each cell centre.
    pub fn multiplicity(&self, f: &SampledFunction) -> Vec<u32> {
        let mut mult = vec![0u32; f.len()];
        let mut p = vec![0.0; f.dim()];
        for cube in &self.cubes {
            for &(idx, _) in cube.region(f).cells() {
                f.point_into(idx, &mut p);
                if cube.contains(&p) {
                    mult[idx] += 1;
                }
            }
        }
        mult
    }
}

fn check_torus(f: &SampledFunction) -> Result<()> {
    match f.domain() {
        Domain::Torus => Ok(()),
        Domain::Box { .. } => Err(Error::InvalidInput("coverings live on the torus".into())),
    }
}

/// Mean of `|f|` over the `3^d` block around each cell.
fn local_mass(f: &SampledFunction) -> Vec<f64> {
    let r = f.resolution() as i64;
    let dim = f.dim();
    let vals = f.values();
    (0..f.len())
        .map(|idx| {
            let m = f.multi_index(idx);
            let mut acc = 0.0;
            let mut nb = [0usize; 3];
            for k in 0..3usize.pow(dim as u32) {
                let mut rest = k;
                for a in 0..dim {
                    let step = (rest % 3) as i64 - 1;
                    rest /= 3;
                    nb[a] = (m[a] as i64 + step).rem_euclid(r) as usize;
                }
                acc += vals[f.flat_index(&nb)].abs();
            }
            acc / 3f64.powi(dim as i32)
        })
        .collect()
}

/// Greedy equal-budget covering with target `‖f‖_{L log L} / n`.
///
/// Candidate centres are the cell centres, taken in order of decreasing local
/// mass (ties by index); a candidate already inside a chosen cube is skipped.
/// Budgets for the next few uncovered candidates are computed in parallel and
/// accepted in order, so the result does not depend on the thread count.
pub fn build_equal_j_covering(f: &SampledFunction, n: usize, tol: f64) -> Result<Covering> {
    check_torus(f)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let norm = field_llogl_norm(f);
    let target = norm / n as f64;
    if n == 1 {
        let whole = TorusCube::whole(f.dim());
        return Ok(Covering {
            cubes: vec![whole],
            j_values: vec![norm],
            saturated: vec![false],
            target,
            tol,
            families: vec![vec![0]],
        });
    }
    let mass = local_mass(f);
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(a.cmp(&b)));

    let mut covered = vec![false; f.len()];
    let mut cubes = Vec::new();
    let mut j_values = Vec::new();
    let mut saturated = Vec::new();
    let mut p = vec![0.0; f.dim()];
    for &idx in &order {
        if covered[idx] {
            continue;
        }
        let (cube, budget) = anchored_cube(f, idx, target, tol, &covered)?;
        for &(c, _) in cube.region(f).cells() {
            f.point_into(c, &mut p);
            if cube.contains(&p) {
                covered[c] = true;
            }
        }
        debug_assert!(covered[idx]);
        cubes.push(cube);
        j_values.push(budget.j_value);
        saturated.push(budget.saturated);
    }
    let keep = prune_redundant(f, &cubes);
    let cubes: Vec<TorusCube> = keep.iter().map(|&k| cubes[k].clone()).collect();
    let j_values = keep.iter().map(|&k| j_values[k]).collect();
    let saturated = keep.iter().map(|&k| saturated[k]).collect();
    let families = besicovitch_select(&cubes);
    Ok(Covering { cubes, j_values, saturated, target, tol, families })
}

/// Cube for the uncovered cell `idx`. Along each axis where exactly one
/// neighbour is already covered, the centre slides away from the covered side
/// by up to half a side, so that consecutive cubes abut rather than overlap by
/// half. The slide is shortened until the cube still contains `idx`.
fn anchored_cube(
    f: &SampledFunction,
    idx: usize,
    target: f64,
    tol: f64,
    covered: &[bool],
) -> Result<(TorusCube, CubeBudget)> {
    let x = f.point(idx);
    let budget = cube_radius_for_budget(f, &x, target, tol)?;
    let r = f.resolution() as i64;
    let m = f.multi_index(idx);
    let mut dir = [0i64; 3];
    for a in 0..f.dim() {
        let mut nb = m;
        nb[a] = (m[a] as i64 - 1).rem_euclid(r) as usize;
        let before = covered[f.flat_index(&nb)];
        nb[a] = (m[a] as i64 + 1).rem_euclid(r) as usize;
        let after = covered[f.flat_index(&nb)];
        dir[a] = match (before, after) {
            (true, false) => 1,
            (false, true) => -1,
            _ => 0,
        };
    }
    let mut shift = (0.5 * budget.side * r as f64).floor() as i64;
    if budget.saturated || dir.iter().all(|&s| s == 0) {
        shift = 0;
    }
    while shift > 0 {
        let mut q = m;
        for a in 0..f.dim() {
            q[a] = (m[a] as i64 + dir[a] * shift).rem_euclid(r) as usize;
        }
        let y = f.point(f.flat_index(&q));
        let b = cube_radius_for_budget(f, &y, target, tol)?;
        let cube = TorusCube::new(y, b.side)?;
        if !b.saturated && cube.contains(&x) {
            return Ok((cube, b));
        }
        shift /= 2;
    }
    Ok((TorusCube::new(x, budget.side)?, budget))
}

/// Drops, latest first, every cube whose cell centres are all covered by the
/// cubes still kept. Returns the indices kept, in order.
fn prune_redundant(f: &SampledFunction, cubes: &[TorusCube]) -> Vec<usize> {
    let mut p = vec![0.0; f.dim()];
    let members: Vec<Vec<usize>> = cubes
        .iter()
        .map(|cube| {
            cube.region(f)
                .cells()
                .iter()
                .map(|c| c.0)
                .filter(|&c| {
                    f.point_into(c, &mut p);
                    cube.contains(&p)
                })
                .collect()
        })
        .collect();
    let mut count = vec![0u32; f.len()];
    for m in &members {
        for &c in m {
            count[c] += 1;
        }
    }
    let mut kept = vec![true; cubes.len()];
    for k in (0..cubes.len()).rev() {
        if members[k].iter().all(|&c| count[c] >= 2) {
            kept[k] = false;
            for &c in &members[k] {
                count[c] -= 1;
            }
        }
    }
    (0..cubes.len()).filter(|&k| kept[k]).collect()
}

/// Greedy partition into families of pairwise disjoint cubes: each cube, in
/// index order, joins the first family it does not meet.
pub fn besicovitch_select(cubes: &[TorusCube]) -> Vec<Vec<usize>> {
    let mut families: Vec<Vec<usize>> = Vec::new();
    for (i, cube) in cubes.iter().enumerate() {
        match families.iter_mut().find(|fam| fam.iter().all(|&j| !cubes[j].overlaps(cube))) {
            Some(fam) => fam.push(i),
            None => families.push(vec![i]),
        }
    }
    families
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    /// Fraction of cell centres inside at least one cube.
    pub coverage: f64,
    pub max_multiplicity: u32,
    /// Largest `|J - target| / target` over non-saturated cubes.
    pub max_rel_deviation: f64,
    pub cube_count: usize,
    pub count_over_n: f64,
    pub saturated: usize,
    pub family_count: usize,
    pub families_disjoint: bool,
}

/// Recomputes every budget and checks coverage, multiplicity and family
/// disjointness.
pub fn verify_covering(f: &SampledFunction, cov: &Covering, n: usize) -> CoveringReport {
    let mult = cov.multiplicity(f);
    let covered = mult.iter().filter(|&&m| m > 0).count();
    let target = field_llogl_norm(f) / n.max(1) as f64;
    let max_rel_deviation = cov
        .cubes
        .par_iter()
        .zip(&cov.saturated)
        .filter(|(_, &s)| !s)
        .map(|(c, _)| ((j_cube(f, c) - target) / target).abs())
        .reduce(|| 0.0, f64::max);
    let families_disjoint = cov.families.iter().all(|fam| {
        fam.iter().enumerate().all(|(a, &i)| fam[a + 1..].iter().all(|&j| !cov.cubes[i].overlaps(&cov.cubes[j])))
    });
    CoveringReport {
        coverage: covered as f64 / f.len() as f64,
        max_multiplicity: mult.iter().copied().max().unwrap_or(0),
        max_rel_deviation,
        cube_count: cov.cubes.len(),
        count_over_n: cov.cubes.len() as f64 / n.max(1) as f64,
        saturated: cov.saturated.iter().filter(|&&s| s).count(),
        family_count: cov.families.len(),
        families_disjoint,
    }
}
