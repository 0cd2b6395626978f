//! Error norms, observed orders and the analytic false-accuracy predictors.

use std::fmt::Write as _;

use nalgebra::SVector;

use crate::error::{Error, Result};

/// Maximum nodal error over `nodes`.
pub fn error_linf(field: &[f64], exact: &[f64], nodes: &[usize]) -> f64 {
    nodes
        .iter()
        .fold(0.0, |m, &i| m.max((field[i] - exact[i]).abs()))
}

/// Per-variable maximum nodal error over `nodes`.
pub fn error_linf_per_variable<const N: usize>(
    field: &[SVector<f64, N>],
    exact: &[SVector<f64, N>],
    nodes: &[usize],
) -> [f64; N] {
    let mut worst = [0.0f64; N];
    for &i in nodes {
        for (k, w) in worst.iter_mut().enumerate() {
            *w = w.max((field[i][k] - exact[i][k]).abs());
        }
    }
    worst
}

/// Largest of the per-variable maximum errors.
pub fn error_linf_multivar<const N: usize>(
    field: &[SVector<f64, N>],
    exact: &[SVector<f64, N>],
    nodes: &[usize],
) -> f64 {
    error_linf_per_variable(field, exact, nodes)
        .into_iter()
        .fold(0.0, f64::max)
}

/// Root-mean-square nodal error over `nodes`.
pub fn error_l2(field: &[f64], exact: &[f64], nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let sum: f64 = nodes.iter().map(|&i| (field[i] - exact[i]).powi(2)).sum();
    (sum / nodes.len() as f64).sqrt()
}

/// `log(e1/e2) / log(h1/h2)`.
pub fn observed_order(e1: f64, e2: f64, h1: f64, h2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0) || h1 == h2 || !(h1 > 0.0 && h2 > 0.0) {
        return Err(Error::UndefinedOrder { e1, e2 });
    }
    Ok((e1 / e2).ln() / (h1 / h2).ln())
}

/// Upper bounds `(|T2|, |T3|)` of the second- and third-order truncation
/// terms of UMUSCL at kappa = 1/3 for the sinusoidal Burgers solution.
pub fn te_bounds_burgers(u_inf: f64, epsilon: f64, omega: f64, h: f64) -> (f64, f64) {
    (epsilon / 24.0, omega * (u_inf + epsilon) * h / 12.0)
}

/// Largest `epsilon / u_inf` for which the third-order term still dominates
/// on spacing `h`: `2 h omega / (1 - 2 h omega)`.
pub fn critical_epsilon_ratio(omega: f64, h: f64) -> Result<f64> {
    let a = 2.0 * h * omega;
    if !(a < 1.0) {
        return Err(Error::OutOfRegime(a));
    }
    Ok(a / (1.0 - a))
}

/// Spacing below which second order takes over, for `epsilon_ratio > 0`.
pub fn critical_h(epsilon_ratio: f64, omega: f64) -> f64 {
    epsilon_ratio / (2.0 * omega * (epsilon_ratio + 1.0))
}

/// Critical spacings printed alongside the Burgers study, keyed by `c_eps`.
/// They disagree with [`critical_h`] and are reported only for comparison.
pub const LISTED_CRITICAL_H: [(f64, f64); 4] = [
    (0.05, 0.000410),
    (0.1, 0.00201),
    (0.3, 0.00747),
    (0.5, 0.0107),
];

pub fn listed_critical_h(c_eps: f64) -> Option<f64> {
    LISTED_CRITICAL_H
        .iter()
        .find(|(c, _)| (c - c_eps).abs() < 1e-12)
        .map(|&(_, h)| h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub n: usize,
    pub h: f64,
    pub linf: f64,
    pub l2: f64,
    /// Per-variable L-infinity errors (one entry for scalar problems).
    pub per_variable: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    Linf,
    L2,
}

/// Acceptance band for an observed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderGate {
    Third,
    Second,
}

impl OrderGate {
    pub fn band(self) -> (f64, f64) {
        match self {
            OrderGate::Third => (2.7, 3.3),
            OrderGate::Second => (1.7, 2.3),
        }
    }

    pub fn accepts(self, order: f64) -> bool {
        let (lo, hi) = self.band();
        (lo..=hi).contains(&order)
    }

    pub fn name(self) -> &'static str {
        match self {
            OrderGate::Third => "third",
            OrderGate::Second => "second",
        }
    }
}

impl std::str::FromStr for OrderGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "third" | "3" => Ok(OrderGate::Third),
            "second" | "2" => Ok(OrderGate::Second),
            other => Err(Error::Config(format!("unknown order gate {other:?}"))),
        }
    }
}

/// Critical spacing predicted for a Burgers-family run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPrediction {
    pub epsilon_ratio: f64,
    pub formula: f64,
    pub listed: Option<f64>,
}

impl CriticalPrediction {
    pub fn new(epsilon_ratio: f64, omega: f64) -> Self {
        Self {
            epsilon_ratio,
            formula: critical_h(epsilon_ratio, omega),
            listed: listed_critical_h(epsilon_ratio),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub records: Vec<ErrorRecord>,
    /// Orders between consecutive records; `None` where undefined.
    pub orders_linf: Vec<Option<f64>>,
    pub orders_l2: Vec<Option<f64>>,
    pub norm: Norm,
    pub critical: Option<CriticalPrediction>,
}

/// Sorts the records from coarse to fine and computes pairwise orders.
pub fn build_convergence_report(
    mut records: Vec<ErrorRecord>,
    norm: Norm,
    critical: Option<CriticalPrediction>,
) -> Result<ConvergenceReport> {
    if records.len() < 2 {
        return Err(Error::Config(format!(
            "a convergence report needs at least 2 grids, got {}",
            records.len()
        )));
    }
    records.sort_by(|a, b| b.h.total_cmp(&a.h));
    let pairwise = |pick: fn(&ErrorRecord) -> f64| -> Vec<Option<f64>> {
        records
            .windows(2)
            .map(|p| observed_order(pick(&p[0]), pick(&p[1]), p[0].h, p[1].h).ok())
            .collect()
    };
    let orders_linf = pairwise(|r| r.linf);
    let orders_l2 = pairwise(|r| r.l2);
    Ok(ConvergenceReport {
        records,
        orders_linf,
        orders_l2,
        norm,
        critical,
    })
}

fn fmt_order(o: Option<f64>) -> String {
    o.map_or_else(|| "nan".to_string(), |v| format!("{v:.4}"))
}

impl ConvergenceReport {
    /// Orders in the report's designated norm.
    pub fn orders(&self) -> &[Option<f64>] {
        match self.norm {
            Norm::Linf => &self.orders_linf,
            Norm::L2 => &self.orders_l2,
        }
    }

    pub fn finest_order(&self) -> Option<f64> {
        *self
            .orders()
            .last()
            .expect("report holds at least one pair")
    }

    /// Does the finest-pair order fall inside `gate`?
    pub fn passes(&self, gate: OrderGate) -> bool {
        self.finest_order().is_some_and(|o| gate.accepts(o))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\th\tLinf\tL2\torder_Linf\torder_L2\n");
        for (k, r) in self.records.iter().enumerate() {
            let (ol, o2) = if k == 0 {
                ("-".to_string(), "-".to_string())
            } else {
                (
                    fmt_order(self.orders_linf[k - 1]),
                    fmt_order(self.orders_l2[k - 1]),
                )
            };
            let _ = writeln!(
                out,
                "{}\t{:.10e}\t{:.10e}\t{:.10e}\t{}\t{}",
                r.n, r.h, r.linf, r.l2, ol, o2
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>6} {:>12} {:>12} {:>12} {:>9} {:>9}\n",
            "n", "h", "Linf", "L2", "p(Linf)", "p(L2)"
        );
        for (k, r) in self.records.iter().enumerate() {
            let (ol, o2) = if k == 0 {
                ("-".to_string(), "-".to_string())
            } else {
                (
                    fmt_order(self.orders_linf[k - 1]),
                    fmt_order(self.orders_l2[k - 1]),
                )
            };
            let _ = writeln!(
                out,
                "{:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>9} {:>9}",
                r.n, r.h, r.linf, r.l2, ol, o2
            );
        }
        if let Some(c) = self.critical {
            let _ = write!(
                out,
                "critical h (formula) = {:.6e} for eps/u_inf = {}",
                c.formula, c.epsilon_ratio
            );
            if let Some(l) = c.listed {
                let _ = write!(out, "; listed value = {l}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn norms_on_small_examples() {
        let nodes = [0, 1, 2];
        assert_eq!(error_linf(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &nodes), 0.0);
        assert!((error_linf(&[1.0, 2.01, 3.0], &[1.0, 2.0, 3.0], &nodes) - 0.01).abs() < 1e-15);
        let f = [SVector::from([1e-3, 2e-3, 5e-4])];
        let e = [SVector::from([0.0; 3])];
        assert_eq!(error_linf_multivar(&f, &e, &[0]), 2e-3);
        assert_eq!(error_l2(&[0.5; 4], &[0.0; 4], &[0, 1, 2, 3]), 0.5);
        assert!((error_l2(&[3.0, 4.0], &[0.0, 0.0], &[0, 1]) - 5.0 / 2f64.sqrt()).abs() < 1e-15);
        // only the listed nodes count
        assert_eq!(error_linf(&[9.0, 1.0], &[0.0, 1.0], &[1]), 0.0);
    }

    #[test]
    fn observed_order_examples() {
        let (e, h) = (1.7e-4, 0.01);
        assert!((observed_order(8.0 * e, e, 2.0 * h, h).unwrap() - 3.0).abs() < 1e-12);
        assert!((observed_order(4.0 * e, e, 2.0 * h, h).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(observed_order(e, e, 2.0 * h, h).unwrap(), 0.0);
        assert!(matches!(
            observed_order(0.0, e, 2.0 * h, h),
            Err(Error::UndefinedOrder { .. })
        ));
        assert!(observed_order(e, e, h, h).is_err());
    }

    #[test]
    fn critical_values() {
        assert!((critical_epsilon_ratio(TAU, 1.0 / 127.0).unwrap() - 0.1098136158).abs() < 1e-9);
        assert!((critical_epsilon_ratio(TAU, 1.0 / 38.0).unwrap() - 0.494084836).abs() < 1e-8);
        assert!((critical_h(0.1, TAU) - 0.007234315595).abs() < 1e-10);
        assert!((critical_h(0.5, TAU) - 0.02652582384).abs() < 1e-10);
        assert!(critical_epsilon_ratio(TAU, 1e-12).unwrap() < 1e-10);
        assert!(matches!(
            critical_epsilon_ratio(TAU, 0.1),
            Err(Error::OutOfRegime(_))
        ));
    }

    #[test]
    fn formula_disagrees_with_listed_values_for_small_c_eps() {
        // independent evaluation with the rational form r / (2 w (1 + r))
        let expect = [0.0037894, 0.0072343, 0.0183640, 0.0265258];
        for (k, &(c, listed)) in LISTED_CRITICAL_H.iter().enumerate() {
            let h = critical_h(c, TAU);
            assert!((h - expect[k]).abs() < 1e-7, "{c}: {h}");
            assert!(
                (h - listed).abs() / listed > 0.5,
                "listed {listed} unexpectedly matches"
            );
        }
    }

    #[test]
    fn te_bounds_examples() {
        assert_eq!(te_bounds_burgers(0.3, 0.0, TAU, 0.01).0, 0.0);
        let (t2, t3) = te_bounds_burgers(0.3, 0.03, TAU, 1.0 / 127.0);
        assert!((t2 - 0.00125).abs() < 1e-15);
        assert!((t3 - 0.0013605322515546).abs() < 1e-13);
    }

    #[test]
    fn bounds_balance_at_critical_point() {
        for r in [0.05, 0.1, 0.3, 0.5] {
            let u = 0.3;
            let h = critical_h(r, TAU);
            let (t2, t3) = te_bounds_burgers(u, r * u, TAU, h);
            assert!((t2 - t3).abs() < 1e-15, "{t2} {t3}");
        }
    }

    fn synthetic(ns: &[usize], e: impl Fn(f64) -> f64) -> Vec<ErrorRecord> {
        ns.iter()
            .map(|&n| {
                let h = 1.0 / (n as f64 - 1.0);
                ErrorRecord {
                    n,
                    h,
                    linf: e(h),
                    l2: e(h),
                    per_variable: vec![e(h)],
                }
            })
            .collect()
    }

    #[test]
    fn report_on_pure_cubic_data() {
        let r = build_convergence_report(
            synthetic(&[17, 33, 65], |h| 3.0 * h.powi(3)),
            Norm::Linf,
            None,
        )
        .unwrap();
        // spacing halves only approximately, orders via exact h
        for o in r.orders() {
            assert!((o.unwrap() - 3.0).abs() < 1e-12);
        }
        assert!(r.passes(OrderGate::Third));
        assert!(!r.passes(OrderGate::Second));
    }

    #[test]
    fn report_shows_crossover_from_third_to_second() {
        // e = C2 h^2 + C3 h^3 with C3/C2 = 100: crossover near h = 0.01
        let ns = [5, 9, 17, 33, 65, 129, 257, 513, 1025, 2049];
        let r = build_convergence_report(
            synthetic(&ns, |h| 1e-2 * h * h + h.powi(3)),
            Norm::Linf,
            None,
        )
        .unwrap();
        let orders: Vec<f64> = r.orders().iter().map(|o| o.unwrap()).collect();
        assert!(orders[0] > 2.9);
        assert!(*orders.last().unwrap() < 2.1);
        assert!(orders.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn report_needs_two_records_and_sorts() {
        assert!(build_convergence_report(synthetic(&[17], |h| h), Norm::L2, None).is_err());
        let r =
            build_convergence_report(synthetic(&[65, 17, 33], |h| h * h), Norm::L2, None).unwrap();
        assert_eq!(
            r.records.iter().map(|x| x.n).collect::<Vec<_>>(),
            vec![17, 33, 65]
        );
        let tsv = r.to_tsv();
        assert_eq!(tsv.lines().count(), 4);
        assert!(tsv.starts_with("n\th\tLinf\tL2\torder_Linf\torder_L2"));
    }

    #[test]
    fn table_surfaces_both_critical_values() {
        let c = CriticalPrediction::new(0.05, TAU);
        assert_eq!(c.listed, Some(0.000410));
        let r = build_convergence_report(synthetic(&[17, 33], |h| h), Norm::Linf, Some(c)).unwrap();
        let t = r.to_table();
        assert!(t.contains("3.789") && t.contains("0.00041"), "{t}");
    }

    proptest! {
        #[test]
        fn critical_formulas_are_inverse(r in 1e-4f64..0.999, omega in 0.5f64..20.0) {
            let h = critical_h(r, omega);
            let back = critical_epsilon_ratio(omega, h).unwrap();
            prop_assert!((back - r).abs() <= 1e-12 * r.max(1.0));
        }

        #[test]
        fn observed_order_is_scale_invariant(
            e1 in 1e-8f64..1.0, e2 in 1e-8f64..1.0, h1 in 1e-3f64..0.5, ratio in 1.1f64..4.0,
            se in 1e-3f64..1e3, sh in 1e-2f64..1e2,
        ) {
            let h2 = h1 / ratio;
            let a = observed_order(e1, e2, h1, h2).unwrap();
            let b = observed_order(se * e1, se * e2, sh * h1, sh * h2).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}
