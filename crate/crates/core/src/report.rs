//! Result files: records.csv, summary.json, plots.gp.
//!
//! Floating-point fields are written with 17 significant digits so that
//! parsing the CSV recovers every recorded value exactly; identical
//! configs produce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::harness::AggregateResult;

/// Round-trip-exact decimal form of an f64 (17 significant digits).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

const CSV_HEADER: &str = "replicate,beta,data_seed,mcmc_seed,eval_seed,n,g_n,mc_se,t_n,v_n,\
                          ewkn,gen_from_train,min_ess,max_rhat,mean_accept";

/// Write records.csv, summary.json, and plots.gp into `dir`.
///
/// Returns the paths written.
pub fn export_results(agg: &AggregateResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("records.csv");
    std::fs::write(&csv_path, records_csv(agg))?;
    let json_path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(agg).expect("aggregate serializes") + "\n";
    std::fs::write(&json_path, json)?;
    let gp_path = dir.join("plots.gp");
    std::fs::write(&gp_path, plot_script(agg))?;
    Ok(vec![csv_path, json_path, gp_path])
}

/// One row per replicate × β with all record fields and seeds.
pub fn records_csv(agg: &AggregateResult) -> String {
    let mut out = String::with_capacity(agg.records.len() * 200);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &agg.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.replicate,
            format_f64(r.beta),
            r.data_seed,
            r.mcmc_seed,
            r.eval_seed,
            r.n,
            format_f64(r.g_n),
            format_f64(r.mc_se),
            format_f64(r.t_n),
            format_f64(r.v_n),
            format_f64(r.ewkn),
            format_f64(r.gen_from_train),
            format_f64(r.min_ess),
            format_f64(r.max_rhat),
            format_f64(r.mean_accept),
        );
    }
    out
}

/// A gnuplot script rendering the per-β means of Ĝ and T̂ with their
/// standard errors against the theory lines ±g/(2n).
pub fn plot_script(agg: &AggregateResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Mean generalization/training error vs theory");
    let _ = writeln!(out, "# model: {}  n = {}", agg.model.name, agg.n);
    let _ = writeln!(out, "set terminal pngcairo size 900,600");
    let _ = writeln!(out, "set output 'errors.png'");
    let _ = writeln!(out, "set xlabel 'inverse temperature beta'");
    let _ = writeln!(out, "set ylabel 'nats'");
    let _ = writeln!(out, "set key outside");
    let _ = writeln!(out, "set grid");
    let _ = writeln!(out, "$means << EOD");
    let _ = writeln!(out, "# beta mean_g se_g mean_t se_t");
    for b in &agg.per_beta {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            b.beta,
            b.g_n.mean,
            b.g_n.se.unwrap_or(0.0),
            b.t_n.mean,
            b.t_n.se.unwrap_or(0.0)
        );
    }
    let _ = writeln!(out, "EOD");
    let mut plots = vec![
        "$means using 1:2:3 with yerrorbars pt 7 title 'mean G_n'".to_string(),
        "$means using 1:4:5 with yerrorbars pt 5 title 'mean T_n'".to_string(),
    ];
    if let Some(theory) = &agg.theory {
        plots.push(format!(
            "{} with lines dt 2 lc 'black' title 'g/(2n)'",
            theory.gen_error
        ));
        plots.push(format!(
            "{} with lines dt 3 lc 'black' title '-g/(2n)'",
            theory.train_error
        ));
    }
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}
