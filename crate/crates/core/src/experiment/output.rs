use std::fmt::Write as _;

use super::{ExperimentConfig, Record};
use crate::precond::PressureMode;

/// Paper-style rounding: one decimal below 100, two significant figures
/// above.
pub fn format_cond(v: f64) -> String {
    if v < 100.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.1e}")
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One line per record, full precision.
pub fn to_csv(records: &[Record]) -> String {
    let mut out = String::from(
        "preconditioner,pressure_mode,theta,K,h_exp,h,size,n_null,lambda_min_abs,lambda_max_abs,cond,minres_iterations,minres_converged\n",
    );
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.preconditioner.name(),
            opt(r.pressure_mode.map(PressureMode::name)),
            opt(r.theta),
            r.k,
            r.h_exp,
            r.h(),
            r.size,
            r.n_null,
            r.lambda_min_abs,
            r.lambda_max_abs,
            r.cond,
            opt(r.minres_iterations),
            opt(r.minres_converged),
        )
        .unwrap();
    }
    out
}

/// Distinct values in first-seen order.
fn distinct<T: PartialEq + Copy>(it: impl Iterator<Item = T>) -> Vec<T> {
    let mut v = Vec::new();
    for x in it {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v
}

/// `a`, or `a(b)` for a pair, as in the printed tables.
fn paired(parts: &[String]) -> String {
    match parts {
        [] => String::new(),
        [one] => one.clone(),
        [first, rest @ ..] => format!("{first}({})", rest.join(")(")),
    }
}

/// Angles in headings: exact multiples of pi/4 as fractions, otherwise four
/// decimals.
fn format_theta(t: f64) -> String {
    let quarters = t / std::f64::consts::FRAC_PI_4;
    if (quarters - quarters.round()).abs() > 1e-12 {
        return format!("{t:.4}");
    }
    let q = quarters.round() as i64;
    if q == 0 {
        return "0".into();
    }
    let (num, den) = match q % 4 {
        0 => (q / 4, 1),
        2 | -2 => (q / 2, 2),
        _ => (q, 4),
    };
    let coef = match num {
        1 => String::new(),
        -1 => "-".into(),
        n => n.to_string(),
    };
    if den == 1 {
        format!("{coef}pi")
    } else {
        format!("{coef}pi/{den}")
    }
}

/// One `K x h` table per preconditioner (and tensor angle). Darcy `B2`
/// cells read `dg(exact-schur)` when both pressure modes ran.
pub fn to_markdown(config: &ExperimentConfig, records: &[Record]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# {}\n\n{}\n",
        config.experiment.name(),
        config.experiment.description()
    )
    .unwrap();
    let thetas = distinct(records.iter().map(|r| r.theta.map(f64::to_bits)));
    let ks = distinct(records.iter().map(|r| r.k.to_bits()));
    let hs = distinct(records.iter().map(|r| r.h_exp));
    let precs = distinct(records.iter().map(|r| r.preconditioner));
    for &theta in &thetas {
        for &p in &precs {
            let modes = distinct(
                records
                    .iter()
                    .filter(|r| r.preconditioner == p && r.theta.map(f64::to_bits) == theta)
                    .map(|r| r.pressure_mode),
            );
            if modes.is_empty() {
                continue;
            }
            let names: Vec<String> = modes
                .iter()
                .map(|m| m.map_or("", PressureMode::name).to_string())
                .collect();
            let label = match names.as_slice() {
                [single] if single.is_empty() => p.name().to_string(),
                _ => format!("{} [{}]", p.name(), paired(&names)),
            };
            let heading = match theta {
                Some(t) => format!("## {label}, theta = {}", format_theta(f64::from_bits(t))),
                None => format!("## {label}"),
            };
            let lookup = |k: u64, h: u32, m: Option<PressureMode>| {
                records.iter().find(|r| {
                    r.preconditioner == p
                        && r.theta.map(f64::to_bits) == theta
                        && r.k.to_bits() == k
                        && r.h_exp == h
                        && r.pressure_mode == m
                })
            };
            let table = |cell: &dyn Fn(&Record) -> String| {
                let mut t = String::from("| K \\ h |");
                for h in &hs {
                    write!(t, " 2^-{h} |").unwrap();
                }
                t.push_str("\n|---|");
                t.push_str(&"---|".repeat(hs.len()));
                t.push('\n');
                for &k in &ks {
                    write!(t, "| {:e} |", f64::from_bits(k)).unwrap();
                    for &h in &hs {
                        let parts: Vec<String> = modes
                            .iter()
                            .filter_map(|&m| lookup(k, h, m))
                            .map(cell)
                            .collect();
                        write!(t, " {} |", paired(&parts)).unwrap();
                    }
                    t.push('\n');
                }
                t
            };
            writeln!(
                out,
                "{heading}\n\ncondition numbers\n\n{}",
                table(&|r| format_cond(r.cond))
            )
            .unwrap();
            if records.iter().any(|r| r.minres_iterations.is_some()) {
                let cell = |r: &Record| match (r.minres_iterations, r.minres_converged) {
                    (Some(n), Some(true)) => n.to_string(),
                    (Some(n), _) => format!(">{n}"),
                    _ => String::new(),
                };
                writeln!(out, "MINRES iterations\n\n{}", table(&cell)).unwrap();
            }
        }
    }
    out
}
