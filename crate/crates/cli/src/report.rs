//! Comparison report rendering: per-seed CSV rows, a median aggregate,
//! and a human-readable table.

use fleetplan_core::planner::ComparisonReport;

pub const CSV_HEADER: &str = "seed,cost_nc,cost_c,cost_reduction,visited_nc,visited_c,\
visited_ratio_nc,visited_ratio_c,tdiff_nc_s,tdiff_c_s,tdiff_ratio,duration_nc_s,duration_c_s,\
distance_nc_m,distance_c_m,violation_nc_s,violation_c_s";

/// The numeric columns of one comparison, in CSV order after the seed.
pub struct ReportRow {
    pub seed: u64,
    pub values: [f64; 16],
}

impl ReportRow {
    pub fn from_report(report: &ComparisonReport) -> Self {
        let nc = &report.non_collaborative.metrics.fleet;
        let c = &report.collaborative.metrics.fleet;
        ReportRow {
            seed: report.seed,
            values: [
                nc.cost,
                c.cost,
                report.cost_reduction,
                nc.visited as f64,
                c.visited as f64,
                report.visited_ratio_non_collaborative,
                report.visited_ratio_collaborative,
                nc.time_diff_s,
                c.time_diff_s,
                c.time_diff_s / nc.time_diff_s,
                nc.duration_s,
                c.duration_s,
                nc.distance_m,
                c.distance_m,
                nc.violation_s,
                c.violation_s,
            ],
        }
    }

    fn csv_line(&self, label: &str) -> String {
        let mut line = label.to_string();
        for v in self.values {
            line.push_str(&format!(",{v:.6}"));
        }
        line.push('\n');
        line
    }
}

/// Column-wise median row over the per-seed rows.
pub fn median_row(rows: &[ReportRow]) -> [f64; 16] {
    let mut out = [0.0; 16];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut column: Vec<f64> = rows.iter().map(|r| r.values[i]).collect();
        column.sort_by(f64::total_cmp);
        let n = column.len();
        *slot = if n % 2 == 1 {
            column[n / 2]
        } else {
            (column[n / 2 - 1] + column[n / 2]) / 2.0
        };
    }
    out
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line(&row.seed.to_string()));
    }
    let median = ReportRow { seed: 0, values: median_row(rows) };
    out.push_str(&median.csv_line("median"));
    out
}

/// Aligned table for terminals; one line per seed plus the median.
pub fn to_table(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>6} | {:>11} {:>11} {:>9} | {:>7} {:>7} | {:>9} {:>9} {:>7} | {:>6} {:>6}\n",
        "seed",
        "cost nc",
        "cost c",
        "reduct%",
        "vis nc",
        "vis c",
        "tdiff nc",
        "tdiff c",
        "ratio",
        "viol nc",
        "viol c"
    ));
    out.push_str(&"-".repeat(116));
    out.push('\n');
    let fmt_line = |label: &str, v: &[f64; 16]| {
        format!(
            "{:>6} | {:>11.1} {:>11.1} {:>8.1}% | {:>7.0} {:>7.0} | {:>9.1} {:>9.1} {:>7.3} | {:>6.1} {:>6.1}\n",
            label, v[0], v[1], v[2] * 100.0, v[3], v[4], v[7], v[8], v[9], v[14], v[15]
        )
    };
    for row in rows {
        out.push_str(&fmt_line(&row.seed.to_string(), &row.values));
    }
    out.push_str(&"-".repeat(116));
    out.push('\n');
    out.push_str(&fmt_line("median", &median_row(rows)));
    out
}
