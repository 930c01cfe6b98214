//! Heavy-tailed population averages from one rare, boosted, well-connected
//! unit ("two worlds").
//!
//! Each unit is independently a superstar with probability 1/1000. A
//! superstar attracts edges from almost everyone and responds to its own
//! treatment 11× as strongly. Replicates where a treated superstar appears
//! form one world; all other replicates form another, and the overall
//! distribution of the population average outcome is visibly skewed. Run
//! with `cargo run --release --example two_worlds`.

use spillover_lab::harness::{histogram, run_two_worlds, run_two_worlds_boosted};
use spillover_lab::Result;

fn summarize(label: &str, values: &mut Vec<f64>) {
    if values.is_empty() {
        println!("  {label:<24} (no replicates)");
        return;
    }
    values.sort_by(f64::total_cmp);
    let q = |p: f64| values[((values.len() - 1) as f64 * p).round() as usize];
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    println!(
        "  {label:<24} count {:>4}   mean {:7.3}   median {:7.3}   IQR [{:.3}, {:.3}]",
        values.len(),
        mean,
        q(0.5),
        q(0.25),
        q(0.75)
    );
}

fn main() -> Result<()> {
    let (replications, n) = (300, 1000);
    let rows = run_two_worlds(replications, n, 17)?;

    let mut with: Vec<f64> = rows
        .iter()
        .filter(|r| r.has_treated_superstar == 1)
        .map(|r| r.avg_outcome)
        .collect();
    let mut without: Vec<f64> =
        rows.iter().filter(|r| r.has_treated_superstar == 0).map(|r| r.avg_outcome).collect();

    println!("{replications} replicates at n = {n}, superstar boost ε = 10:");
    summarize("treated superstar", &mut with);
    summarize("no treated superstar", &mut without);

    // An ASCII histogram of the population averages, one shared range.
    let all: Vec<f64> = rows.iter().map(|r| r.avg_outcome).collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("\npopulation-average histogram (■ = treated-superstar world):");
    let bins_with = histogram(&with, lo, hi, 14, "with")?;
    let bins_without = histogram(&without, lo, hi, 14, "without")?;
    for (w, wo) in bins_with.iter().zip(&bins_without) {
        println!(
            "  [{:7.3}, {:7.3})  {}{}",
            w.bin_lo,
            w.bin_hi,
            "□".repeat(wo.count.min(70)),
            "■".repeat(w.count.min(70)),
        );
    }

    // With ε = 0 the response boost disappears; superstars still reshape the
    // graph, but the separation between the worlds largely closes.
    let rows0 = run_two_worlds_boosted(replications, n, 17, 0.0)?;
    let mut with0: Vec<f64> = rows0
        .iter()
        .filter(|r| r.has_treated_superstar == 1)
        .map(|r| r.avg_outcome)
        .collect();
    let mut without0: Vec<f64> =
        rows0.iter().filter(|r| r.has_treated_superstar == 0).map(|r| r.avg_outcome).collect();
    println!("\nablation with ε = 0 (no boost):");
    summarize("treated superstar", &mut with0);
    summarize("no treated superstar", &mut without0);
    Ok(())
}
