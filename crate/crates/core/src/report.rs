//! CSV output for plotting. Every writer is deterministic for a given input.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::fl::DataShard;
use crate::orbital::AccessTable;
use crate::sim::{Comparison, RunResult};

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(String::new, |x| format!("{x:.digits$}"))
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

/// `orbit,slot,visit_index,t_start_s,t_end_s,duration_s`.
pub fn write_windows<W: Write>(table: &AccessTable<f64>, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["orbit", "slot", "visit_index", "t_start_s", "t_end_s", "duration_s"])?;
    for win in table.iter() {
        w.write_record([
            win.satellite.orbit.to_string(),
            win.satellite.slot.to_string(),
            win.visit_index.to_string(),
            format!("{:.2}", win.t_start),
            format!("{:.2}", win.t_end),
            format!("{:.2}", win.duration()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `time,kind,subject,round,detail`.
pub fn write_events<W: Write>(run: &RunResult, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["time", "kind", "subject", "round", "detail"])?;
    for e in &run.events {
        w.write_record([
            format!("{:.4}", e.time),
            e.kind.to_string(),
            e.subject.to_string(),
            e.round.to_string(),
            e.detail.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `round,wall_time_s,accuracy,loss`, with the wall time measured from t = 0.
pub fn write_metrics<W: Write>(run: &RunResult, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["round", "wall_time_s", "accuracy", "loss"])?;
    for r in &run.rounds {
        w.write_record([
            r.round.to_string(),
            format!("{:.4}", r.t_end),
            format!("{:.6}", r.global_accuracy),
            format!("{:.6}", r.global_loss),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-orbit phase breakdown of every round.
pub fn write_orbits<W: Write>(run: &RunResult, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        "round",
        "orbit",
        "sink",
        "sources",
        "duplicate_drops",
        "wait_broadcast_s",
        "uplink_s",
        "propagation_s",
        "train_s",
        "relay_s",
        "wait_sink_s",
        "downlink_s",
        "total_s",
        "t_sum_star_s",
        "star_t_sum_s",
    ])?;
    for r in &run.rounds {
        for o in &r.orbits {
            w.write_record([
                r.round.to_string(),
                o.orbit.to_string(),
                o.sink.map_or_else(String::new, |s| s.to_string()),
                o.sources.to_string(),
                o.duplicate_drops.to_string(),
                format!("{:.4}", o.t_wait_broadcast),
                format!("{:.4}", o.t_uplink),
                format!("{:.4}", o.t_propagation),
                format!("{:.4}", o.t_train),
                format!("{:.4}", o.t_relay),
                format!("{:.4}", o.t_wait_sink),
                format!("{:.4}", o.t_downlink),
                format!("{:.4}", o.total),
                opt(o.t_sum_star_estimate, 4),
                opt(o.star_t_sum, 4),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison<W: Write>(cmp: &Comparison, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        "round",
        "fedleo_wall_time_s",
        "fedleo_elapsed_s",
        "fedleo_accuracy",
        "star_wall_time_s",
        "star_elapsed_s",
        "star_accuracy",
    ])?;
    for r in &cmp.rows {
        w.write_record([
            r.round.to_string(),
            opt(r.fedleo_wall_time, 4),
            opt(r.fedleo_elapsed, 4),
            opt(r.fedleo_accuracy, 6),
            opt(r.star_wall_time, 4),
            opt(r.star_elapsed, 4),
            opt(r.star_accuracy, 6),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `orbit,slot,samples,class_0..class_{C-1}`.
pub fn write_partition<W: Write>(shards: &[DataShard<f64>], out: W) -> Result<()> {
    let mut w = writer(out);
    let classes = shards.first().map_or(0, |s| s.data.num_classes);
    let mut header = vec!["orbit".to_string(), "slot".into(), "samples".into()];
    header.extend((0..classes).map(|c| format!("class_{c}")));
    w.write_record(&header)?;
    for s in shards {
        let mut row = vec![s.owner.orbit.to_string(), s.owner.slot.to_string(), s.size().to_string()];
        row.extend(s.data.class_histogram().iter().map(usize::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text summary printed by the `compare` command.
pub fn comparison_summary(cmp: &Comparison) -> String {
    let secs = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.1} s ({:.2} h)", x / 3600.0));
    let mut s = String::new();
    s.push_str(&format!("{:<28}{:>24}{:>24}\n", "", "fedleo", "star"));
    s.push_str(&format!("{:<28}{:>24}{:>24}\n", "completed rounds", cmp.fedleo_rounds, cmp.star_rounds));
    s.push_str(&format!(
        "{:<28}{:>24}{:>24}\n",
        "mean round time",
        secs(cmp.fedleo_mean_round),
        secs(cmp.star_mean_round)
    ));
    let last_acc = |f: fn(&crate::sim::ComparisonRow) -> Option<f64>| {
        cmp.rows.iter().rev().find_map(f).map_or_else(|| "-".to_string(), |a| format!("{:.4}", a))
    };
    s.push_str(&format!(
        "{:<28}{:>24}{:>24}\n",
        "final accuracy",
        last_acc(|r| r.fedleo_accuracy),
        last_acc(|r| r.star_accuracy)
    ));
    if let Some(t) = cmp.target_accuracy {
        s.push_str(&format!(
            "{:<28}{:>24}{:>24}\n",
            format!("time to accuracy {t:.2}"),
            secs(cmp.fedleo_time_to_target),
            secs(cmp.star_time_to_target)
        ));
    }
    s.push_str(&format!(
        "speedup (star / fedleo mean round time): {}\n",
        cmp.speedup.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
    ));
    s
}

/// Writes `windows.csv` into `dir`.
pub fn save_windows(table: &AccessTable<f64>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_windows(table, fs::File::create(dir.join("windows.csv"))?)
}

/// Writes `events.csv`, `metrics.csv` and `orbits.csv` into `dir`.
pub fn save_run(run: &RunResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_events(run, fs::File::create(dir.join("events.csv"))?)?;
    write_metrics(run, fs::File::create(dir.join("metrics.csv"))?)?;
    write_orbits(run, fs::File::create(dir.join("orbits.csv"))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbital::{AccessWindow, SatId};

    #[test]
    fn windows_csv_layout() {
        let w = AccessWindow { satellite: SatId::new(1, 2), t_start: 10.0, t_end: 70.126, visit_index: 1 };
        let mut per_sat = vec![vec![]; 8];
        per_sat[6].push(w);
        let table = AccessTable::from_windows(4, (0.0, 100.0), per_sat);
        let mut buf = Vec::new();
        write_windows(&table, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "orbit,slot,visit_index,t_start_s,t_end_s,duration_s\n1,2,1,10.00,70.13,60.13\n"
        );
    }
}
