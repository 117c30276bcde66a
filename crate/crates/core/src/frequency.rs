//! Frequency sweep and cover selection.
//!
//! `scan` solves the forward problem for every sampled frequency and
//! evaluates the chosen condition family on the interior band. From that,
//! `select_cover` greedily picks a finite frequency set K maximizing the
//! achieved threshold s = min over band cells of max over K of the
//! coverage value, and reports the per-frequency subdomains where the
//! conditions exceed s/2 together with their connected components.

use ndarray::Array3;
use rayon::prelude::*;

use crate::calculus::average_edge_to_cell;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::forward::maxwell::{solve_maxwell, MaxwellOptions};
use crate::functionals::{evaluate_zeta, ConditionField, ZetaId};
use crate::grid::Grid;
use crate::illum::Illumination;
use crate::material::MaterialParams;
use crate::tol;

/// Uniform sampling of the admissible range, strictly inside the
/// endpoints (cell-midpoint rule).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub n_samples: usize,
}

impl FrequencyGrid {
    pub fn new(k_min: f64, k_max: f64, n_samples: usize) -> Result<Self> {
        if !(0.0 < k_min && k_min < k_max) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < K_min < K_max, got [{k_min}, {k_max}]"
            )));
        }
        if n_samples == 0 {
            return Err(Error::InvalidArgument("need at least one frequency sample".into()));
        }
        Ok(Self { k_min, k_max, n_samples })
    }

    pub fn samples(&self) -> Vec<f64> {
        let w = (self.k_max - self.k_min) / self.n_samples as f64;
        (0..self.n_samples)
            .map(|i| self.k_min + (i as f64 + 0.5) * w)
            .collect()
    }
}

/// Condition fields for each successfully scanned frequency.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub grid: Grid,
    pub zeta: ZetaId,
    /// Band depth of the condition values.
    pub depth: usize,
    pub illumination_ids: Vec<String>,
    pub entries: Vec<ConditionField>,
    /// Frequencies excluded because a forward solve failed.
    pub failures: Vec<(f64, String)>,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub tol_rel: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { tol_rel: tol::MAXWELL_REL }
    }
}

/// Solve all (omega, illumination) pairs and evaluate the condition family.
pub fn scan(
    params: &MaterialParams,
    illuminations: &[Illumination],
    zeta: ZetaId,
    freq: &FrequencyGrid,
    options: &ScanOptions,
) -> Result<ScanResult> {
    let desc = zeta.descriptor();
    if illuminations.len() != desc.b {
        return Err(Error::InvalidArgument(format!(
            "{} needs {} illuminations, got {}",
            zeta.name(),
            desc.b,
            illuminations.len()
        )));
    }
    let grid = params.grid;
    let depth = grid.margin().max(desc.derivative_order);
    let ids: Vec<String> = illuminations.iter().map(|i| i.id.clone()).collect();

    let per_omega: Vec<std::result::Result<ConditionField, (f64, String)>> = freq
        .samples()
        .par_iter()
        .map(|&omega| {
            let mut fields: Vec<VectorField> = Vec::with_capacity(illuminations.len());
            for ill in illuminations {
                let opts = MaxwellOptions { tol_rel: options.tol_rel, ..Default::default() };
                match solve_maxwell(grid, params, omega, ill, None, &opts) {
                    Ok(sol) => fields.push(
                        average_edge_to_cell(&sol.e).map_err(|e| (omega, e.to_string()))?,
                    ),
                    Err(e) => return Err((omega, format!("{}: {e}", ill.id))),
                }
            }
            let refs: Vec<&VectorField> = fields.iter().collect();
            evaluate_zeta(zeta, &refs, depth, omega, ids.clone())
                .map_err(|e| (omega, e.to_string()))
        })
        .collect();

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for r in per_omega {
        match r {
            Ok(cf) => entries.push(cf),
            Err(f) => failures.push(f),
        }
    }
    if entries.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "every sampled frequency failed; first: {:?}",
            failures.first()
        )));
    }
    Ok(ScanResult { grid, zeta, depth, illumination_ids: ids, entries, failures })
}

/// Selection policy for the greedy cover.
#[derive(Debug, Clone, Default)]
pub struct CoverPolicy {
    /// Stop as soon as the achieved threshold reaches this value.
    pub target_s: Option<f64>,
    /// Maximum number of frequencies to select.
    pub max_k: Option<usize>,
}

/// Certified frequency set with masks and components.
#[derive(Debug, Clone)]
pub struct CoverReport {
    pub grid: Grid,
    pub zeta: ZetaId,
    pub depth: usize,
    pub illumination_ids: Vec<String>,
    /// Selected frequencies, in greedy selection order.
    pub selected: Vec<f64>,
    /// Achieved threshold: min over band of max over K of the coverage
    /// value min_l |zeta_l|.
    pub s: f64,
    /// Per-frequency masks { min_l |zeta_l| > s/2 } on the band, aligned
    /// with `selected`.
    pub masks: Vec<Array3<bool>>,
    /// Component labels per mask (0 = outside, 1.. = component id).
    pub component_labels: Vec<Array3<u32>>,
    pub component_counts: Vec<usize>,
    /// Fraction of band cells covered by the union of the masks.
    pub coverage_fraction: f64,
    /// Informational notes (e.g. more frequencies than expected).
    pub warnings: Vec<String>,
}

impl CoverReport {
    pub fn mask_for(&self, omega: f64) -> Option<&Array3<bool>> {
        self.selected
            .iter()
            .position(|w| *w == omega)
            .map(|i| &self.masks[i])
    }
}

/// Achieved threshold of a frequency subset: min over band cells of the
/// best coverage value, plus the worst cell.
pub fn achieved_threshold(
    entries: &[&ConditionField],
    grid: Grid,
    depth: usize,
) -> (f64, (usize, usize, usize)) {
    let mut worst = f64::INFINITY;
    let mut worst_cell = (0, 0, 0);
    for (i, j, k) in grid.band_cells(depth).expect("depth checked") {
        let best = entries
            .iter()
            .map(|e| e.min_over_conditions(i, j, k))
            .fold(0.0f64, f64::max);
        if best < worst {
            worst = best;
            worst_cell = (i, j, k);
        }
    }
    (worst, worst_cell)
}

/// Greedy max-min selection over the scanned frequencies.
pub fn select_cover(scan: &ScanResult, policy: &CoverPolicy) -> Result<CoverReport> {
    if scan.entries.is_empty() {
        return Err(Error::InvalidArgument("empty scan".into()));
    }
    let grid = scan.grid;
    let depth = scan.depth;
    let budget = policy.max_k.unwrap_or(scan.entries.len()).min(scan.entries.len());

    let mut best: Array3<f64> = Array3::zeros(grid.cell_dims());
    let mut selected_idx: Vec<usize> = Vec::new();
    let mut current_s = 0.0f64;

    while selected_idx.len() < budget {
        let mut best_candidate: Option<(usize, f64)> = None;
        for (idx, cf) in scan.entries.iter().enumerate() {
            if selected_idx.contains(&idx) {
                continue;
            }
            let mut cand_s = f64::INFINITY;
            for (i, j, k) in grid.band_cells(depth)? {
                let v = best[[i, j, k]].max(cf.min_over_conditions(i, j, k));
                cand_s = cand_s.min(v);
            }
            let better = match best_candidate {
                None => true,
                Some((_, s)) => cand_s > s,
            };
            if better {
                best_candidate = Some((idx, cand_s));
            }
        }
        let Some((idx, cand_s)) = best_candidate else { break };
        if !selected_idx.is_empty() && cand_s <= current_s {
            break; // no improvement
        }
        selected_idx.push(idx);
        current_s = cand_s;
        let cf = &scan.entries[idx];
        for (i, j, k) in grid.band_cells(depth)? {
            let v = cf.min_over_conditions(i, j, k);
            if v > best[[i, j, k]] {
                best[[i, j, k]] = v;
            }
        }
        if let Some(target) = policy.target_s {
            if current_s >= target {
                break;
            }
        }
    }

    if current_s <= 0.0 {
        // some band cell is uncovered at every sampled frequency
        let refs: Vec<&ConditionField> = scan.entries.iter().collect();
        let (_, cell) = achieved_threshold(&refs, grid, depth);
        return Err(Error::Uncoverable(cell.0, cell.1, cell.2));
    }

    let selected: Vec<f64> = selected_idx.iter().map(|&i| scan.entries[i].omega).collect();
    let half_s = current_s / 2.0;
    let mut masks = Vec::new();
    let mut component_labels = Vec::new();
    let mut component_counts = Vec::new();
    for &idx in &selected_idx {
        let cf = &scan.entries[idx];
        let mut mask = Array3::from_elem(grid.cell_dims(), false);
        for (i, j, k) in grid.band_cells(depth)? {
            mask[[i, j, k]] = cf.min_over_conditions(i, j, k) > half_s;
        }
        let (labels, count) = components(&mask);
        masks.push(mask);
        component_labels.push(labels);
        component_counts.push(count);
    }

    let mut covered = 0usize;
    let mut total = 0usize;
    for (i, j, k) in grid.band_cells(depth)? {
        total += 1;
        if masks.iter().any(|m| m[[i, j, k]]) {
            covered += 1;
        }
    }
    let coverage_fraction = covered as f64 / total.max(1) as f64;

    let mut warnings = Vec::new();
    if selected.len() > tol::COVER_SOFT_MAX_K {
        warnings.push(format!(
            "|K| = {} exceeds the expected {} frequencies",
            selected.len(),
            tol::COVER_SOFT_MAX_K
        ));
    }
    if coverage_fraction < 1.0 {
        warnings.push(format!("coverage fraction {coverage_fraction} < 1 on the band"));
    }

    Ok(CoverReport {
        grid,
        zeta: scan.zeta,
        depth,
        illumination_ids: scan.illumination_ids.clone(),
        selected,
        s: current_s,
        masks,
        component_labels,
        component_counts,
        coverage_fraction,
        warnings,
    })
}

/// 6-connected component labeling of a cell mask. Labels are assigned in
/// lexicographic order of each component's first cell, starting at 1.
pub fn components(mask: &Array3<bool>) -> (Array3<u32>, usize) {
    let dims = mask.dim();
    let mut labels = Array3::zeros(dims);
    let mut next = 0u32;
    let mut queue = std::collections::VecDeque::new();
    for i in 0..dims.0 {
        for j in 0..dims.1 {
            for k in 0..dims.2 {
                if !mask[[i, j, k]] || labels[[i, j, k]] != 0 {
                    continue;
                }
                next += 1;
                labels[[i, j, k]] = next;
                queue.push_back((i, j, k));
                while let Some((a, b, c)) = queue.pop_front() {
                    let mut visit = |x: usize, y: usize, z: usize| {
                        if mask[[x, y, z]] && labels[[x, y, z]] == 0 {
                            labels[[x, y, z]] = next;
                            queue.push_back((x, y, z));
                        }
                    };
                    if a > 0 {
                        visit(a - 1, b, c);
                    }
                    if a + 1 < dims.0 {
                        visit(a + 1, b, c);
                    }
                    if b > 0 {
                        visit(a, b - 1, c);
                    }
                    if b + 1 < dims.1 {
                        visit(a, b + 1, c);
                    }
                    if c > 0 {
                        visit(a, b, c - 1);
                    }
                    if c + 1 < dims.2 {
                        visit(a, b, c + 1);
                    }
                }
            }
        }
    }
    (labels, next as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::illum;

    fn synthetic_condition(grid: Grid, depth: usize, omega: f64, f: impl Fn(usize, usize, usize) -> f64) -> ConditionField {
        let mut arr = Array3::zeros(grid.cell_dims());
        for (i, j, k) in grid.band_cells(depth).unwrap() {
            arr[[i, j, k]] = f(i, j, k);
        }
        ConditionField {
            grid,
            depth,
            conditions: vec![arr],
            omega,
            illumination_ids: vec![],
        }
    }

    fn synthetic_scan(grid: Grid, entries: Vec<ConditionField>) -> ScanResult {
        ScanResult {
            grid,
            zeta: ZetaId::Zeta1,
            depth: entries[0].depth,
            illumination_ids: vec![],
            entries,
            failures: vec![],
        }
    }

    #[test]
    fn frequency_samples_stay_strictly_inside() {
        let f = FrequencyGrid::new(0.5, 2.0, 8).unwrap();
        let s = f.samples();
        assert_eq!(s.len(), 8);
        assert!(s.iter().all(|w| *w > 0.5 && *w < 2.0));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(FrequencyGrid::new(0.0, 1.0, 4).is_err());
        assert!(FrequencyGrid::new(2.0, 1.0, 4).is_err());
    }

    #[test]
    fn near_static_scan_of_constant_medium_is_nondegenerate() {
        // at omega ~ 0 the fields approach e_i, so |det| ~ 1 on the band
        let g = Grid::with_default_margin(8).unwrap();
        let params = MaterialParams::constant(g, 1.0, 1.0, 1.0).unwrap();
        let freq = FrequencyGrid::new(0.5e-3, 1.5e-3, 1).unwrap();
        let scan_res = scan(
            &params,
            &illum::basis_triple(),
            ZetaId::Zeta1,
            &freq,
            &ScanOptions::default(),
        )
        .unwrap();
        assert_eq!(scan_res.entries.len(), 1);
        assert!(scan_res.entries[0].min_over_band() >= 0.9);
    }

    #[test]
    fn scan_rejects_wrong_illumination_count() {
        let g = Grid::with_default_margin(7).unwrap();
        let params = MaterialParams::constant(g, 1.0, 1.0, 1.0).unwrap();
        let freq = FrequencyGrid::new(0.5, 2.0, 2).unwrap();
        let two = vec![Illumination::basis(0), Illumination::basis(1)];
        assert!(scan(&params, &two, ZetaId::Zeta1, &freq, &ScanOptions::default()).is_err());
    }

    #[test]
    fn repeated_scans_are_bit_identical() {
        let g = Grid::with_default_margin(7).unwrap();
        let params = MaterialParams::constant(g, 1.0, 1.0, 1.0).unwrap();
        let freq = FrequencyGrid::new(0.8, 1.2, 2).unwrap();
        let a = scan(&params, &illum::basis_triple(), ZetaId::Zeta1, &freq, &ScanOptions::default()).unwrap();
        let b = scan(&params, &illum::basis_triple(), ZetaId::Zeta1, &freq, &ScanOptions::default()).unwrap();
        for (ea, eb) in a.entries.iter().zip(&b.entries) {
            assert_eq!(ea.conditions[0], eb.conditions[0]);
        }
    }

    #[test]
    fn single_uniform_frequency_covers_alone() {
        let g = Grid::with_default_margin(8).unwrap();
        let cf = synthetic_condition(g, 2, 1.0, |_, _, _| 0.95);
        let scan_res = synthetic_scan(g, vec![cf]);
        let report = select_cover(&scan_res, &CoverPolicy::default()).unwrap();
        assert_eq!(report.selected, vec![1.0]);
        assert!(report.s >= 0.9);
        assert_eq!(report.coverage_fraction, 1.0);
        assert_eq!(report.component_counts, vec![1]);
    }

    #[test]
    fn two_half_domain_fields_need_both_and_match_brute_force() {
        let g = Grid::with_default_margin(8).unwrap();
        let mid = g.n() / 2;
        let left = synthetic_condition(g, 2, 1.0, |i, _, _| if i < mid { 0.8 } else { 0.0 });
        let right = synthetic_condition(g, 2, 1.5, |i, _, _| if i >= mid { 0.6 } else { 0.0 });
        let scan_res = synthetic_scan(g, vec![left, right]);
        let report = select_cover(&scan_res, &CoverPolicy::default()).unwrap();
        let mut sel = report.selected.clone();
        sel.sort_by(f64::total_cmp);
        assert_eq!(sel, vec![1.0, 1.5]);
        assert!((report.s - 0.6).abs() < 1e-12);

        // brute force over all subsets agrees on the best achievable s
        let refs: Vec<&ConditionField> = scan_res.entries.iter().collect();
        let mut best = 0.0f64;
        for bits in 1u32..(1 << refs.len()) {
            let subset: Vec<&ConditionField> = refs
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, cf)| *cf)
                .collect();
            let (s, _) = achieved_threshold(&subset, g, 2);
            best = best.max(s);
        }
        assert!((report.s - best).abs() < 1e-12);
    }

    #[test]
    fn common_dead_cell_is_reported() {
        let g = Grid::with_default_margin(8).unwrap();
        let dead = (3, 4, 5);
        let mk = |omega: f64| {
            synthetic_condition(g, 2, omega, |i, j, k| {
                if (i, j, k) == dead { 0.0 } else { 1.0 }
            })
        };
        let scan_res = synthetic_scan(g, vec![mk(1.0), mk(1.5), mk(2.0)]);
        match select_cover(&scan_res, &CoverPolicy::default()) {
            Err(Error::Uncoverable(i, j, k)) => assert_eq!((i, j, k), dead),
            other => panic!("expected uncoverable error, got {other:?}"),
        }
    }

    #[test]
    fn adding_a_frequency_never_decreases_s() {
        let g = Grid::with_default_margin(8).unwrap();
        let mut entries = Vec::new();
        for (idx, omega) in [0.6, 0.9, 1.3, 1.8].iter().enumerate() {
            entries.push(synthetic_condition(g, 2, *omega, move |i, j, k| {
                0.1 + 0.05 * ((i + 2 * j + 3 * k + idx) % 7) as f64
            }));
        }
        let scan_res = synthetic_scan(g, entries);
        let refs: Vec<&ConditionField> = scan_res.entries.iter().collect();
        // s is monotone under subset growth
        let (s01, _) = achieved_threshold(&refs[0..1], g, 2);
        let (s012, _) = achieved_threshold(&refs[0..2], g, 2);
        let (s_all, _) = achieved_threshold(&refs[..], g, 2);
        assert!(s012 >= s01);
        assert!(s_all >= s012);

        // certification soundness: re-evaluating on the selected K
        // reproduces the reported s exactly
        let report = select_cover(&scan_res, &CoverPolicy::default()).unwrap();
        let chosen: Vec<&ConditionField> = report
            .selected
            .iter()
            .map(|w| scan_res.entries.iter().find(|e| e.omega == *w).unwrap())
            .collect();
        let (s_re, _) = achieved_threshold(&chosen, g, 2);
        assert_eq!(s_re, report.s);
    }

    #[test]
    fn component_labels_match_union_find_oracle() {
        let g = Grid::with_default_margin(8).unwrap();
        let mut mask = Array3::from_elem(g.cell_dims(), false);
        // two disjoint boxes
        for i in 2..4 {
            for j in 2..4 {
                for k in 2..4 {
                    mask[[i, j, k]] = true;
                }
            }
        }
        for i in 5..6 {
            for j in 5..6 {
                for k in 2..6 {
                    mask[[i, j, k]] = true;
                }
            }
        }
        let (labels, count) = components(&mask);
        assert_eq!(count, 2);
        assert_eq!(labels[[2, 2, 2]], 1);
        assert_eq!(labels[[5, 5, 3]], 2);

        // random mask vs an independent union-find count
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let mut mask = Array3::from_elem(g.cell_dims(), false);
        mask.mapv_inplace(|_| rng.gen_bool(0.35));
        let (_, count) = components(&mask);
        assert_eq!(count, union_find_count(&mask));
    }

    fn union_find_count(mask: &Array3<bool>) -> usize {
        let dims = mask.dim();
        let idx = |i: usize, j: usize, k: usize| (i * dims.1 + j) * dims.2 + k;
        let n = dims.0 * dims.1 * dims.2;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, a: usize) -> usize {
            let mut root = a;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = a;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                for k in 0..dims.2 {
                    if !mask[[i, j, k]] {
                        continue;
                    }
                    if i + 1 < dims.0 && mask[[i + 1, j, k]] {
                        let (a, b) = (find(&mut parent, idx(i, j, k)), find(&mut parent, idx(i + 1, j, k)));
                        parent[a] = b;
                    }
                    if j + 1 < dims.1 && mask[[i, j + 1, k]] {
                        let (a, b) = (find(&mut parent, idx(i, j, k)), find(&mut parent, idx(i, j + 1, k)));
                        parent[a] = b;
                    }
                    if k + 1 < dims.2 && mask[[i, j, k + 1]] {
                        let (a, b) = (find(&mut parent, idx(i, j, k)), find(&mut parent, idx(i, j, k + 1)));
                        parent[a] = b;
                    }
                }
            }
        }
        let mut roots = std::collections::BTreeSet::new();
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                for k in 0..dims.2 {
                    if mask[[i, j, k]] {
                        let r = find(&mut parent, idx(i, j, k));
                        roots.insert(r);
                    }
                }
            }
        }
        roots.len()
    }
}
