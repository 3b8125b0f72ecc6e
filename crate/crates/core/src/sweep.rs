//! Grid sweeps over strategy parameters (and optionally the entanglement
//! coefficient), exported as CSV.

use std::io::Write;

use crate::config::ScenarioTemplate;
use crate::error::{Error, Result};
use crate::game::StrategyProfile;

/// Axis name that sweeps the entanglement coefficient instead of a group.
pub const ENTANGLEMENT_AXIS: &str = "a";

#[derive(Debug, Clone, PartialEq)]
pub enum AxisValues {
    Range { start: f64, stop: f64, step: f64 },
    Fixed(f64),
}

impl AxisValues {
    /// `start, start + step, …` up to and including `stop` (within 1e-9 of a step).
    pub fn points(&self) -> Vec<f64> {
        match *self {
            AxisValues::Fixed(v) => vec![v],
            AxisValues::Range { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count)
                    .map(|i| (start + i as f64 * step).min(stop))
                    .collect()
            }
        }
    }

    /// Parses `start:stop:step` or a single value.
    pub fn parse(text: &str) -> Result<Self> {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("`{s}` is not a number in `{text}`")))
        };
        let parts: Vec<&str> = text.split(':').collect();
        match parts[..] {
            [v] => Ok(AxisValues::Fixed(num(v)?)),
            [a, b, c] => Ok(AxisValues::Range {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            }),
            _ => Err(Error::Config(format!(
                "`{text}` is neither a value nor start:stop:step"
            ))),
        }
    }

    fn validate(&self, name: &str, max: f64) -> Result<()> {
        let within = |v: f64| (0.0..=max).contains(&v);
        match *self {
            AxisValues::Fixed(v) if !within(v) => Err(Error::Domain(format!(
                "value {v} for `{name}` is outside [0, {max}]"
            ))),
            AxisValues::Range { start, stop, step } => {
                if step.is_nan() || step <= 0.0 {
                    return Err(Error::Config(format!(
                        "step for `{name}` must be positive, got {step}"
                    )));
                }
                if !within(start) || !within(stop) || start > stop {
                    return Err(Error::Domain(format!(
                        "range {start}:{stop} for `{name}` is not an increasing range inside [0, {max}]"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub values: AxisValues,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<SweepAxis>,
    /// Output columns after the parameters; defaults to every `P_X`.
    pub columns: Option<Vec<String>>,
}

impl SweepSpec {
    pub fn axis(mut self, name: &str, values: AxisValues) -> Self {
        self.axes.push(SweepAxis {
            name: name.to_string(),
            values,
        });
        self
    }

    pub fn columns(mut self, columns: &[&str]) -> Self {
        self.columns = Some(columns.iter().map(|c| c.to_string()).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Evaluates every grid point. Rows are ordered lexicographically with the
/// entanglement axis (if any) outermost, then groups in game order.
pub fn run_sweep(template: &ScenarioTemplate, sweep: &SweepSpec) -> Result<SweepTable> {
    let spec = &template.spec;
    let mut a_axis = None;
    let mut group_axes: Vec<Option<&AxisValues>> = vec![None; spec.n_groups()];
    for axis in &sweep.axes {
        if axis.name == ENTANGLEMENT_AXIS {
            if !template.supports_entanglement() {
                return Err(Error::Config(
                    "sweeping `a` needs a two-component initial state given by `a`".into(),
                ));
            }
            axis.values.validate(&axis.name, 0.5)?;
            if a_axis.replace(&axis.values).is_some() {
                return Err(Error::Config("axis `a` given twice".into()));
            }
            continue;
        }
        let g = spec.group_index(&axis.name).ok_or_else(|| {
            Error::Config(format!(
                "unknown sweep axis `{}`; use `a` or one of {}",
                axis.name,
                spec.groups()
                    .iter()
                    .map(|g| g.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?;
        axis.values.validate(&axis.name, 1.0)?;
        if group_axes[g].replace(&axis.values).is_some() {
            return Err(Error::Config(format!("axis `{}` given twice", axis.name)));
        }
    }
    let group_points = group_axes
        .iter()
        .enumerate()
        .map(|(g, v)| {
            v.map(|v| v.points()).ok_or_else(|| {
                Error::Config(format!(
                    "no value or range for group `{}`",
                    spec.groups()[g].name
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let probe = template.build(None)?;
    let payoff_names = probe.payoff_column_names();
    let columns: Vec<String> = sweep
        .columns
        .clone()
        .unwrap_or_else(|| payoff_names.clone());
    let extractors = columns
        .iter()
        .map(|c| {
            if c == "total_weight" {
                Ok(None)
            } else {
                payoff_names
                    .iter()
                    .position(|n| n == c)
                    .map(Some)
                    .ok_or_else(|| Error::Config(format!("unknown output column `{c}`")))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut header = Vec::new();
    if a_axis.is_some() {
        header.push(ENTANGLEMENT_AXIS.to_string());
    }
    header.extend(spec.groups().iter().map(|g| g.name.clone()));
    header.extend(columns.iter().cloned());

    let a_points: Vec<Option<f64>> = match a_axis {
        Some(v) => v.points().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut rows = Vec::new();
    for a in a_points {
        let scenario = template.build(a)?;
        let mut index = vec![0usize; group_points.len()];
        loop {
            let values: Vec<f64> = index
                .iter()
                .zip(&group_points)
                .map(|(&i, pts)| pts[i])
                .collect();
            let eval = scenario.evaluate(&StrategyProfile::new(values.clone())?)?;
            let mut row = Vec::with_capacity(header.len());
            row.extend(a);
            row.extend(values);
            row.extend(extractors.iter().map(|e| match e {
                Some(p) => eval.payoffs[*p],
                None => eval.total_weight(),
            }));
            rows.push(row);

            // odometer, last axis fastest
            let mut k = index.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                index[k] += 1;
                if index[k] < group_points[k].len() {
                    break;
                }
                index[k] = 0;
            }
            if index.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(SweepTable { header, rows })
}

/// Formats with 12 significant digits, fixed notation for moderate
/// magnitudes, trailing zeros trimmed. `-0` prints as `0`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    let mut s = if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        return sci;
    };
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

pub fn write_csv<W: Write>(table: &SweepTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format_sig(*v)))?;
    }
    w.flush()?;
    Ok(())
}
