//! Biomass accuracy metrics: MAD, MAPD, regression, cumulative group
//! deviations, plus pairing and reporting helpers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_csv;

pub const DEFAULT_GROUP_SIZES: [usize; 6] = [5, 10, 15, 20, 25, 30];
pub const DEFAULT_REPEATS: usize = 100;
/// Maximum base distance, meters, for pairing estimated and reference trees.
pub const MATCH_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub tree_id: i64,
    pub agb_est_kg: f64,
    pub agb_ref_kg: f64,
}

/// Paired estimates and references, kg.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSeries {
    records: Vec<EvalRecord>,
}

impl EvalSeries {
    pub fn new(records: Vec<EvalRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(EvalSeries { records })
    }

    /// Series from parallel estimate and reference slices, ids 0..n.
    pub fn from_pairs(est: &[f64], reference: &[f64]) -> Result<Self> {
        Self::new(
            est.iter()
                .zip(reference)
                .enumerate()
                .map(|(i, (&a, &d))| EvalRecord {
                    tree_id: i as i64,
                    agb_est_kg: a,
                    agb_ref_kg: d,
                })
                .collect(),
        )
    }

    pub fn records(&self) -> &[EvalRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Mean absolute difference in Mg.
pub fn mad(series: &EvalSeries) -> f64 {
    let r = series.records();
    r.iter().map(|x| (x.agb_est_kg - x.agb_ref_kg).abs()).sum::<f64>() / r.len() as f64 / 1000.0
}

/// Mean absolute percentage deviation, percent.
pub fn mapd(series: &EvalSeries) -> Result<f64> {
    let r = series.records();
    let mut sum = 0.0;
    for (i, x) in r.iter().enumerate() {
        if !(x.agb_ref_kg > 0.0) {
            return Err(Error::NonPositiveReference(i));
        }
        sum += (x.agb_est_kg - x.agb_ref_kg).abs() / x.agb_ref_kg;
    }
    Ok(100.0 * sum / r.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub r2: f64,
    pub slope: f64,
    pub intercept: f64,
}

/// Least squares of estimate on reference.
pub fn regress(series: &EvalSeries) -> Result<Regression> {
    let r = series.records();
    let n = r.len() as f64;
    if r.len() < 2 {
        return Err(Error::DegenerateRegression);
    }
    let mx = r.iter().map(|x| x.agb_ref_kg).sum::<f64>() / n;
    let my = r.iter().map(|x| x.agb_est_kg).sum::<f64>() / n;
    let sxx: f64 = r.iter().map(|x| (x.agb_ref_kg - mx).powi(2)).sum();
    let sxy: f64 = r.iter().map(|x| (x.agb_ref_kg - mx) * (x.agb_est_kg - my)).sum();
    let syy: f64 = r.iter().map(|x| (x.agb_est_kg - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateRegression);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = r
        .iter()
        .map(|x| (x.agb_est_kg - (intercept + slope * x.agb_ref_kg)).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(Regression { r2, slope, intercept })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativeRow {
    pub group_size: usize,
    /// Mean group deviation, percent.
    pub mean: f64,
    /// Population standard deviation, percent.
    pub std: f64,
}

/// For each size, `repeats` seeded draws of distinct trees; per draw the
/// deviation of the summed estimate from the summed reference.
pub fn cumulative_groups(series: &EvalSeries, sizes: &[usize], repeats: usize, seed: u64) -> Result<Vec<CumulativeRow>> {
    let r = series.records();
    let n = r.len();
    if let Some(&g) = sizes.iter().find(|&&g| g > n || g == 0) {
        return Err(Error::GroupTooLarge { size: g, n });
    }
    if let Some(i) = r.iter().position(|x| !(x.agb_ref_kg > 0.0)) {
        return Err(Error::NonPositiveReference(i));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sizes.len());
    for &g in sizes {
        let devs: Vec<f64> = (0..repeats.max(1))
            .map(|_| {
                let idx = rand::seq::index::sample(&mut rng, n, g);
                let (mut a, mut d) = (0.0, 0.0);
                for i in idx.iter() {
                    a += r[i].agb_est_kg;
                    d += r[i].agb_ref_kg;
                }
                (a - d).abs() / d * 100.0
            })
            .collect();
        let mean = devs.iter().sum::<f64>() / devs.len() as f64;
        let var = devs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / devs.len() as f64;
        out.push(CumulativeRow {
            group_size: g,
            mean,
            std: var.sqrt(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub tree_id: i64,
    pub agb_est_kg: f64,
    pub agb_ref_kg: f64,
    pub diff_kg: f64,
    pub rel_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub mad_mg: f64,
    pub mapd_pct: f64,
    /// Absent for fewer than two trees or constant references.
    pub regression: Option<Regression>,
    pub residuals: Vec<Residual>,
    pub cumulative: Option<Vec<CumulativeRow>>,
}

/// Cumulative table request.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeSpec {
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CumulativeSpec {
    fn default() -> Self {
        CumulativeSpec {
            sizes: DEFAULT_GROUP_SIZES.to_vec(),
            repeats: DEFAULT_REPEATS,
            seed: 0,
        }
    }
}

pub fn evaluate(series: &EvalSeries, cumulative: Option<&CumulativeSpec>) -> Result<EvalReport> {
    let mapd_pct = mapd(series)?;
    let regression = match regress(series) {
        Ok(r) => Some(r),
        Err(Error::DegenerateRegression) => None,
        Err(e) => return Err(e),
    };
    let cumulative = match cumulative {
        Some(c) => {
            // sizes larger than the series are dropped rather than failing the report
            let sizes: Vec<usize> = c.sizes.iter().copied().filter(|&g| g <= series.len()).collect();
            Some(cumulative_groups(series, &sizes, c.repeats, c.seed)?)
        }
        None => None,
    };
    Ok(EvalReport {
        n: series.len(),
        mad_mg: mad(series),
        mapd_pct,
        regression,
        residuals: series
            .records()
            .iter()
            .map(|x| Residual {
                tree_id: x.tree_id,
                agb_est_kg: x.agb_est_kg,
                agb_ref_kg: x.agb_ref_kg,
                diff_kg: x.agb_est_kg - x.agb_ref_kg,
                rel_pct: (x.agb_est_kg - x.agb_ref_kg) / x.agb_ref_kg * 100.0,
            })
            .collect(),
        cumulative,
    })
}

impl EvalReport {
    /// Plain-text summary.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "trees      {}", self.n);
        let _ = writeln!(s, "MAD (Mg)   {:.4}", self.mad_mg);
        let _ = writeln!(s, "MAPD (%)   {:.2}", self.mapd_pct);
        if let Some(r) = self.regression {
            let _ = writeln!(s, "R2         {:.4}", r.r2);
            let _ = writeln!(s, "fit        est = {:.4} * ref + {:.2} kg", r.slope, r.intercept);
        }
        if let Some(rows) = &self.cumulative {
            let _ = writeln!(s, "\ngroup  mean(%)  std(%)");
            for r in rows {
                let _ = writeln!(s, "{:>5}  {:>7.2}  {:>6.2}", r.group_size, r.mean, r.std);
            }
        }
        s
    }
}

/// Reads `tree_id,agb_est_kg,agb_ref_kg`.
pub fn load_pairs(path: &Path) -> Result<EvalSeries> {
    let rows: Vec<(usize, EvalRecord)> = read_csv(path, &["tree_id", "agb_est_kg", "agb_ref_kg"])?;
    for (line, r) in &rows {
        if !(r.agb_est_kg.is_finite() && r.agb_ref_kg.is_finite()) {
            return Err(Error::parse(path, *line, "non-finite biomass"));
        }
        if !(r.agb_ref_kg > 0.0) {
            return Err(Error::parse(path, *line, "reference biomass must be positive"));
        }
    }
    EvalSeries::new(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn save_pairs(series: &EvalSeries, path: &Path) -> Result<()> {
    let mut s = String::from("tree_id,agb_est_kg,agb_ref_kg\n");
    for r in series.records() {
        let _ = writeln!(s, "{},{},{}", r.tree_id, r.agb_est_kg, r.agb_ref_kg);
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// A tree located by its base, with a biomass value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatedTree {
    pub tree_id: i64,
    pub base: [f64; 3],
    pub agb_kg: f64,
}

/// One-to-one pairing of estimated and reference trees by base distance:
/// closest pairs first, ties by ids, pairs farther than `max_dist` dropped.
/// Records carry the reference id and come out sorted by it.
pub fn match_by_base(est: &[LocatedTree], reference: &[LocatedTree], max_dist: f64) -> Vec<EvalRecord> {
    let mut cand = Vec::new();
    for (i, e) in est.iter().enumerate() {
        for (j, r) in reference.iter().enumerate() {
            let d = (0..3).map(|k| (e.base[k] - r.base[k]).powi(2)).sum::<f64>().sqrt();
            if d <= max_dist {
                cand.push((d, i, j));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_e = vec![false; est.len()];
    let mut used_r = vec![false; reference.len()];
    let mut out = Vec::new();
    for (_, i, j) in cand {
        if used_e[i] || used_r[j] {
            continue;
        }
        used_e[i] = true;
        used_r[j] = true;
        out.push(EvalRecord {
            tree_id: reference[j].tree_id,
            agb_est_kg: est[i].agb_kg,
            agb_ref_kg: reference[j].agb_kg,
        });
    }
    out.sort_by_key(|r| r.tree_id);
    out
}

/// Agreement of a predicted per-point tree labeling with the truth; -1
/// marks understory in both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationScore {
    pub predicted_trees: usize,
    /// Share of points in predicted trees that carry their tree's majority
    /// truth label.
    pub purity: f64,
    /// Share of truth understory points left out of every predicted tree.
    pub understory_recall: f64,
    /// Majority truth label per predicted tree, in predicted-id order.
    pub majority: Vec<(i64, i64)>,
}

pub fn segmentation_scores(predicted: &[i64], truth: &[i64]) -> SegmentationScore {
    assert_eq!(predicted.len(), truth.len(), "label vectors differ in length");
    let mut counts: BTreeMap<i64, BTreeMap<i64, usize>> = BTreeMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        if p >= 0 {
            *counts.entry(p).or_default().entry(t).or_default() += 1;
        }
    }
    let mut agree = 0;
    let mut total = 0;
    let mut majority = Vec::new();
    for (&p, c) in &counts {
        // ties go to the smaller truth label
        let (&lab, &n) = c.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).expect("nonempty");
        agree += n;
        total += c.values().sum::<usize>();
        majority.push((p, lab));
    }
    let under: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] < 0).collect();
    let kept = under.iter().filter(|&&i| predicted[i] < 0).count();
    SegmentationScore {
        predicted_trees: counts.len(),
        purity: if total > 0 { agree as f64 / total as f64 } else { 1.0 },
        understory_recall: if under.is_empty() { 1.0 } else { kept as f64 / under.len() as f64 },
        majority,
    }
}

/// Estimate-vs-reference scatter with the 1:1 line, as a standalone SVG.
pub fn scatter_svg(series: &EvalSeries, title: &str) -> String {
    let (w, h, m) = (480.0, 480.0, 56.0);
    let hi = series
        .records()
        .iter()
        .flat_map(|r| [r.agb_est_kg, r.agb_ref_kg])
        .fold(0.0f64, f64::max)
        .max(1e-9)
        * 1.05;
    let sx = |v: f64| m + v / hi * (w - 2.0 * m);
    let sy = |v: f64| h - m - v / hi * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 3"/>"#,
        sx(0.0),
        sy(0.0),
        sx(hi),
        sy(hi)
    );
    for k in 0..=4 {
        let v = hi * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{v:.0}</text>"#,
            sx(v),
            h - m + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.0}</text>"#,
            m - 6.0,
            sy(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">reference AGB (kg)</text>"#,
        w / 2.0,
        h - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">estimated AGB (kg)</text>"#,
        h / 2.0,
        h / 2.0
    );
    for r in series.records() {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"><title>tree {}</title></circle>"#,
            sx(r.agb_ref_kg),
            sy(r.agb_est_kg),
            r.tree_id
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(a: &[f64], d: &[f64]) -> EvalSeries {
        EvalSeries::from_pairs(a, d).unwrap()
    }

    #[test]
    fn mad_examples() {
        assert!((mad(&series(&[2000.0, 3000.0], &[1000.0, 2000.0])) - 1.0).abs() < 1e-12);
        assert_eq!(mad(&series(&[5.0, 7.0], &[5.0, 7.0])), 0.0);
        assert!((mad(&series(&[1500.0], &[1000.0])) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mapd_examples() {
        assert!((mapd(&series(&[2.0, 3.0], &[1.0, 2.0])).unwrap() - 75.0).abs() < 1e-12);
        assert_eq!(mapd(&series(&[4.0], &[4.0])).unwrap(), 0.0);
        assert!((mapd(&series(&[1.2 * 50.0], &[50.0])).unwrap() - 20.0).abs() < 1e-12);
        assert!(matches!(
            mapd(&series(&[1.0, 1.0], &[1.0, 0.0])),
            Err(Error::NonPositiveReference(1))
        ));
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(EvalSeries::new(Vec::new()), Err(Error::EmptySeries)));
    }

    #[test]
    fn regression_identity_and_scale() {
        let d = [1.0, 2.0, 4.0, 8.0];
        let r = regress(&series(&d, &d)).unwrap();
        assert!((r.r2 - 1.0).abs() < 1e-12 && (r.slope - 1.0).abs() < 1e-12 && r.intercept.abs() < 1e-12);
        let a: Vec<f64> = d.iter().map(|x| 2.0 * x).collect();
        let r = regress(&series(&a, &d)).unwrap();
        assert!((r.r2 - 1.0).abs() < 1e-12 && (r.slope - 2.0).abs() < 1e-12);
        assert!(matches!(regress(&series(&[1.0, 2.0], &[3.0, 3.0])), Err(Error::DegenerateRegression)));
        assert!(matches!(regress(&series(&[1.0], &[3.0])), Err(Error::DegenerateRegression)));
    }

    #[test]
    fn regression_matches_normal_equations() {
        let d = [1.0, 2.0, 3.0, 4.0, 5.0];
        let a = [1.1, 2.3, 2.8, 4.4, 4.9];
        // normal equations [n Σx; Σx Σx²] [b; m] = [Σy; Σxy] solved by Cramer's rule
        let n = 5.0;
        let sx: f64 = d.iter().sum();
        let sxx: f64 = d.iter().map(|x| x * x).sum();
        let sy: f64 = a.iter().sum();
        let sxy: f64 = d.iter().zip(&a).map(|(x, y)| x * y).sum();
        let det = n * sxx - sx * sx;
        let m = (n * sxy - sx * sy) / det;
        let b = (sxx * sy - sx * sxy) / det;
        let yhat: Vec<f64> = d.iter().map(|x| b + m * x).collect();
        let ybar = sy / n;
        let r2 = 1.0
            - a.iter().zip(&yhat).map(|(y, f)| (y - f).powi(2)).sum::<f64>()
                / a.iter().map(|y| (y - ybar).powi(2)).sum::<f64>();
        let r = regress(&series(&a, &d)).unwrap();
        assert!((r.slope - m).abs() < 1e-9);
        assert!((r.intercept - b).abs() < 1e-9);
        assert!((r.r2 - r2).abs() < 1e-9);
    }

    fn thirty() -> Vec<f64> {
        (0..30).map(|i| 100.0 + 37.0 * i as f64 + (i * i) as f64).collect()
    }

    #[test]
    fn cumulative_constant_bias() {
        let d = thirty();
        let a: Vec<f64> = d.iter().map(|x| 1.1 * x).collect();
        let t = cumulative_groups(&series(&a, &d), &DEFAULT_GROUP_SIZES, 100, 3).unwrap();
        assert_eq!(t.len(), 6);
        for row in t {
            assert!((row.mean - 10.0).abs() < 1e-9, "{row:?}");
            assert!(row.std < 1e-9, "{row:?}");
        }
    }

    #[test]
    fn cumulative_identity_and_determinism() {
        let d = thirty();
        let t = cumulative_groups(&series(&d, &d), &[5, 30], 20, 1).unwrap();
        assert!(t.iter().all(|r| r.mean == 0.0 && r.std == 0.0));
        let a: Vec<f64> = d.iter().enumerate().map(|(i, x)| x * (1.0 + 0.01 * (i % 7) as f64)).collect();
        let s = series(&a, &d);
        assert_eq!(
            cumulative_groups(&s, &DEFAULT_GROUP_SIZES, 100, 9).unwrap(),
            cumulative_groups(&s, &DEFAULT_GROUP_SIZES, 100, 9).unwrap()
        );
        assert!(matches!(
            cumulative_groups(&s, &[31], 10, 0),
            Err(Error::GroupTooLarge { size: 31, n: 30 })
        ));
    }

    #[test]
    fn report_and_pairs_round_trip() {
        let s = series(&[2000.0, 3000.0], &[1000.0, 2000.0]);
        let r = evaluate(&s, Some(&CumulativeSpec::default())).unwrap();
        assert!((r.mad_mg - 1.0).abs() < 1e-12 && (r.mapd_pct - 75.0).abs() < 1e-12);
        assert_eq!(r.cumulative.as_deref(), Some(&[][..]));
        assert!(r.table().contains("MAPD (%)   75.00"));
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("pairs.csv");
        save_pairs(&s, &p).unwrap();
        assert_eq!(load_pairs(&p).unwrap(), s);
        fs::write(&p, "tree_id,agb_est_kg,agb_ref_kg\n0,1,2\n1,x,2\n").unwrap();
        assert!(matches!(load_pairs(&p), Err(Error::Parse { line: 3, .. })));
        fs::write(&p, "tree_id,agb_est_kg,agb_ref_kg\n0,1,0\n").unwrap();
        assert!(matches!(load_pairs(&p), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn base_matching_is_one_to_one() {
        let t = |id, x: f64, agb| LocatedTree {
            tree_id: id,
            base: [x, 0.0, 0.0],
            agb_kg: agb,
        };
        let est = [t(0, 0.2, 10.0), t(1, 0.1, 11.0), t(2, 5.0, 12.0), t(3, 9.0, 1.0)];
        let refs = [t(10, 0.0, 20.0), t(11, 5.9, 21.0), t(12, 20.0, 22.0)];
        let m = match_by_base(&est, &refs, MATCH_DISTANCE);
        assert_eq!(
            m,
            vec![
                EvalRecord { tree_id: 10, agb_est_kg: 11.0, agb_ref_kg: 20.0 },
                EvalRecord { tree_id: 11, agb_est_kg: 12.0, agb_ref_kg: 21.0 },
            ]
        );
    }

    #[test]
    fn segmentation_score_hand_example() {
        // predicted tree 0 = {t0,t0,t0,shrub}, tree 1 = {t1,t0}, rest understory
        let pred = [0, 0, 0, 0, 1, 1, -1, -1, -1];
        let truth = [0, 0, 0, -1, 1, 0, -1, -1, 1];
        let s = segmentation_scores(&pred, &truth);
        assert_eq!(s.predicted_trees, 2);
        assert!((s.purity - 4.0 / 6.0).abs() < 1e-12);
        assert!((s.understory_recall - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.majority, vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn svg_has_one_marker_per_tree() {
        let s = scatter_svg(&series(&[1.0, 2.0, 3.0], &[1.5, 2.0, 2.5]), "a<b");
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>") && s.contains("a&lt;b"));
    }
}
