//! CSV tables and a text summary derived from a [`ResultBundle`].

use super::bundle::{fmt12, BundleKind, ResultBundle};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Mean over rebound intervals of `(Σp − Σk)` minus the baseline `Σp`.
/// `None` without a baseline block or rebound intervals.
pub fn valley_filling(b: &ResultBundle) -> Option<f64> {
    let base = b.baseline.as_ref()?;
    let p = b.total(|x| &x.p);
    let k = b.total(|x| &x.k);
    let gaps: Vec<f64> = (0..b.horizon()).filter(|&t| b.request[t] < 0.0).map(|t| p[t] - k[t] - base.grid_draw[t]).collect();
    (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64)
}

/// Sample correlation between `α` and the price `h` over response intervals.
/// `None` with fewer than two such intervals or a constant series.
pub fn anti_phase(b: &ResultBundle) -> Option<f64> {
    let idx: Vec<usize> = (0..b.horizon()).filter(|&t| b.request[t] > 0.0).collect();
    let a: Vec<f64> = idx.iter().map(|&t| b.leader.alpha[t]).collect();
    let h: Vec<f64> = idx.iter().map(|&t| b.price[t]).collect();
    correlation(&a, &h)
}

fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), fmt12)
}

/// Writes `schedules.csv`, `flexibility.csv`, `grid_draw.csv`, `pricing.csv`
/// and `summary.txt` into `out` and returns their paths.
pub fn emit_report(b: &ResultBundle, out: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let t = b.horizon();
    let names = ["schedules.csv", "flexibility.csv", "grid_draw.csv", "pricing.csv", "summary.txt"];
    let files: Vec<PathBuf> = names.iter().map(|n| out.join(n)).collect();

    write_csv(
        &files[0],
        &["prosumer", "tau", "p_kw", "y_kw", "e_kwh", "p_charge_kw", "p_discharge_kw", "k_kw", "t"],
        b.schedules.iter().flat_map(|s| {
            let x = &s.decision;
            (0..t).map(move |k| {
                let mut row = vec![s.prosumer.to_string(), k.to_string()];
                row.extend(x.blocks().iter().map(|blk| fmt12(blk[k])));
                row
            })
        }),
    )?;

    let y = b.total(|x| &x.y);
    let kk = b.total(|x| &x.k);
    write_csv(
        &files[1],
        &["tau", "request_kw", "response_kw", "rebound_kw"],
        (0..t).map(|k| vec![k.to_string(), fmt12(b.request[k]), fmt12(y[k]), fmt12(kk[k])]),
    )?;

    let p = b.total(|x| &x.p);
    write_csv(
        &files[2],
        &["tau", "grid_draw_kw", "baseline_kw"],
        (0..t).map(|k| {
            let base = b.baseline.as_ref().map(|c| c.grid_draw[k]);
            vec![k.to_string(), fmt12(p[k]), base.map_or_else(String::new, fmt12)]
        }),
    )?;

    write_csv(
        &files[3],
        &["tau", "c0", "alpha", "price"],
        (0..t).map(|k| vec![k.to_string(), fmt12(b.leader.c0[k]), fmt12(b.leader.alpha[k]), fmt12(b.price[k])]),
    )?;

    let mut s = String::new();
    let kind = match b.kind {
        BundleKind::DemandResponse => "demand response",
        BundleKind::Baseline => "baseline (request forced to zero)",
    };
    let c = &b.certificate;
    let _ = writeln!(s, "run: {kind}");
    let _ = writeln!(s, "prosumers: {}  intervals: {}  dt: {} h", b.schedules.len(), t, fmt12(b.dt));
    let _ = writeln!(s, "leader cost J_DSO: {}", fmt12(b.costs.j_dso));
    let _ = writeln!(
        s,
        "follower costs: {}",
        b.costs.j_followers.iter().map(|v| fmt12(*v)).collect::<Vec<_>>().join(", ")
    );
    let _ = writeln!(
        s,
        "certificate: {} (radius {}, {} samples, {} failed, worst improvement {}, tolerance {})",
        if c.passed { "passed" } else { "FAILED" },
        fmt12(c.radius),
        c.samples,
        c.failed,
        fmt12(c.worst_improvement),
        fmt12(c.tol_improve)
    );
    let r = &b.residuals;
    let _ = writeln!(
        s,
        "residuals: stationarity {}, feasibility {}, complementarity {}, coupling {}",
        fmt12(r.stationarity),
        fmt12(r.feasibility),
        fmt12(r.complementarity),
        fmt12(r.coupling)
    );
    if let Some(base) = &b.baseline {
        let _ = writeln!(s, "baseline J_DSO: {}", fmt12(base.j_dso));
    }
    let _ = writeln!(s, "valley-filling metric: {}", opt(valley_filling(b)));
    let _ = writeln!(s, "anti-phase correlation (alpha vs price, response intervals): {}", opt(anti_phase(b)));
    std::fs::write(&files[4], s)?;
    Ok(files)
}
