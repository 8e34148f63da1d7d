//! Experiment pipeline: config files, per-row solves, CSV tables and paths files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};

use kdp_milp::{gap, solve_bb, solve_lp, Status};

use crate::formulations::{build, decode, FormulationKind, Options, Tag};
use crate::graph::{has_k_disjoint, DirectedNetwork, GraphError, PathSeq};
use crate::instance::InstanceSpec;
use crate::ipm::{ipm, parse_alpha};
use crate::loops::remove_loops;
use crate::metrics::{avdi, midi, to_3dp};
use crate::par::{self, Exec};
use crate::rstar::rstar_flow;

pub const CSV_HEADER: &str = "instance,K,method,status,objective,bound,gap_pct,time_ms,avdi,midi";
pub const PATHS_HEADER: &str = "# kdp-paths v1";
pub const DEFAULT_TIME_LIMIT_MS: u64 = 300_000;
pub const WORKERS_ENV: &str = "KDP_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("bad glob `{0}`")]
    Glob(String),
    #[error("paths file line {line}: {msg}")]
    Paths { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A solving method: one of the MILP formulations or the penalty heuristic.
///
/// Written as the formulation tag, an `a` suffix for the presence-bounded
/// variant (`mraa`, `mroa`, `mara`), and optional `:drop` / `:noagg` flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Milp { tag: Tag, drop_redundant: bool, aggregate_linking: bool, presence: bool },
    Ipm,
}

impl Method {
    pub fn milp(tag: Tag) -> Self {
        Method::Milp { tag, drop_redundant: false, aggregate_linking: tag == Tag::Mar, presence: false }
    }

    /// Formulation options; the presence bound is filled in per instance.
    pub fn kind(&self, presence_bound: Option<usize>) -> Option<FormulationKind> {
        match *self {
            Method::Milp { tag, drop_redundant, aggregate_linking, .. } => Some(FormulationKind {
                tag,
                options: Options { drop_redundant, aggregate_linking, presence_bound },
            }),
            Method::Ipm => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Method::Ipm => write!(f, "ipm"),
            Method::Milp { tag, drop_redundant, aggregate_linking, presence } => {
                write!(f, "{}", tag.as_str())?;
                if presence {
                    write!(f, "a")?;
                }
                if drop_redundant {
                    write!(f, ":drop")?;
                }
                if tag == Tag::Mar && !aggregate_linking {
                    write!(f, ":noagg")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let mut parts = lower.split(':');
        let head = parts.next().unwrap_or_default();
        if head == "ipm" {
            return match parts.next() {
                None => Ok(Method::Ipm),
                Some(flag) => Err(format!("ipm takes no flags (got `{flag}`)")),
            };
        }
        let (tag, presence) = match head.parse::<Tag>() {
            Ok(t) => (t, false),
            Err(_) => match head.strip_suffix('a').and_then(|h| h.parse::<Tag>().ok()) {
                Some(t) => (t, true),
                None => return Err(format!("unknown method `{s}`")),
            },
        };
        let mut m = Method::milp(tag);
        if let Method::Milp { drop_redundant, aggregate_linking, presence: p, .. } = &mut m {
            *p = presence;
            for flag in parts {
                match flag {
                    "drop" => *drop_redundant = true,
                    "noagg" => *aggregate_linking = false,
                    "agg" => *aggregate_linking = true,
                    _ => return Err(format!("unknown method flag `{flag}`")),
                }
            }
        }
        m.kind(presence.then_some(1)).map_or(Ok(()), |k| k.validate().map_err(|e| e.to_string()))?;
        Ok(m)
    }
}

/// Where an instance comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSource {
    Spec(InstanceSpec),
    File(PathBuf),
}

impl InstanceSource {
    /// Instance id: the spec id, or the file stem.
    pub fn id(&self) -> String {
        match self {
            InstanceSource::Spec(s) => s.id(),
            InstanceSource::File(p) => p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()),
        }
    }

    /// Group for averaging: the id without its seed for random instances.
    pub fn group(&self) -> String {
        let id = self.id();
        match id.parse::<InstanceSpec>() {
            Ok(spec) => spec.group(),
            Err(_) => id,
        }
    }

    pub fn load(&self) -> Result<DirectedNetwork, String> {
        match self {
            InstanceSource::Spec(s) => s.generate().map_err(|e| e.to_string()),
            InstanceSource::File(p) => DirectedNetwork::read_file(p).map_err(|e| format!("{}: {e}", p.display())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instances: Vec<InstanceSource>,
    pub ks: Vec<usize>,
    /// Method names as written; unparsable ones become error rows.
    pub methods: Vec<String>,
    pub time_limit_ms: u64,
    pub alpha: Rational64,
    pub filter_disjoint: bool,
    pub output: Option<PathBuf>,
    /// Directory for one paths file per solved row.
    pub paths_dir: Option<PathBuf>,
    /// 0 means the default pool.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            instances: Vec::new(),
            ks: Vec::new(),
            methods: Vec::new(),
            time_limit_ms: DEFAULT_TIME_LIMIT_MS,
            alpha: Rational64::from_integer(1),
            filter_disjoint: false,
            output: None,
            paths_dir: None,
            workers: std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(0),
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

/// `3`, `3..5` (inclusive) or comma-separated mixes of both.
fn parse_range_list(v: &str) -> Option<Vec<u64>> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                if a > b {
                    return None;
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().ok()?),
        }
    }
    (!out.is_empty()).then_some(out)
}

/// Instance ids; a random id may give its seed as a range, e.g. `R_20_40_1..5`.
fn parse_instance_ids(v: &str) -> Option<Vec<InstanceSpec>> {
    let mut out = Vec::new();
    for word in v.split(',').map(str::trim).filter(|w| !w.is_empty()) {
        if let Some((stem, seeds)) = word.rsplit_once('_').filter(|(_, s)| s.contains("..")) {
            for seed in parse_range_list(seeds)? {
                out.push(format!("{stem}_{seed}").parse().ok()?);
            }
        } else {
            out.push(word.parse().ok()?);
        }
    }
    Some(out)
}

impl ExperimentConfig {
    /// Parse the `key = value` config format. Relative file paths and globs
    /// are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, HarnessError> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| HarnessError::Config { line, msg };
            let (key, value) = content.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            match key.as_str() {
                "instance" | "instances" => {
                    let specs = parse_instance_ids(value).ok_or_else(|| err(format!("bad instance id list `{value}`")))?;
                    cfg.instances.extend(specs.into_iter().map(InstanceSource::Spec));
                }
                "file" | "files" => {
                    for pat in value.split_whitespace() {
                        let full = base.join(pat);
                        let full = full.to_string_lossy();
                        let mut found: Vec<PathBuf> = glob::glob(&full)
                            .map_err(|_| HarnessError::Glob(pat.to_string()))?
                            .filter_map(Result::ok)
                            .collect();
                        if found.is_empty() {
                            return Err(err(format!("`{pat}` matches no file")));
                        }
                        found.sort();
                        cfg.instances.extend(found.into_iter().map(InstanceSource::File));
                    }
                }
                "k" => {
                    let ks = parse_range_list(value).ok_or_else(|| err(format!("bad K list `{value}`")))?;
                    if ks.iter().any(|&k| k < 2) {
                        return Err(err("K values must be at least 2".into()));
                    }
                    cfg.ks = ks.into_iter().map(|k| k as usize).collect();
                }
                "method" | "methods" => {
                    cfg.methods.extend(value.split(',').map(str::trim).filter(|m| !m.is_empty()).map(String::from));
                }
                "time_limit_ms" => {
                    cfg.time_limit_ms =
                        value.parse().ok().filter(|&t| t > 0).ok_or_else(|| err(format!("bad time limit `{value}`")))?;
                }
                "alpha" => {
                    cfg.alpha = parse_alpha(value)
                        .filter(|a| *a >= Rational64::from_integer(0))
                        .ok_or_else(|| err(format!("bad alpha `{value}`")))?;
                }
                "filter_disjoint" => {
                    cfg.filter_disjoint = parse_bool(value).ok_or_else(|| err(format!("bad boolean `{value}`")))?;
                }
                "output" => cfg.output = Some(base.join(value)),
                "paths_dir" => cfg.paths_dir = Some(base.join(value)),
                "workers" => cfg.workers = value.parse().map_err(|_| err(format!("bad worker count `{value}`")))?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if cfg.instances.is_empty() {
            return Err(HarnessError::Config { line: 0, msg: "no instances given".into() });
        }
        if cfg.ks.is_empty() {
            return Err(HarnessError::Config { line: 0, msg: "no K values given".into() });
        }
        if cfg.methods.is_empty() {
            return Err(HarnessError::Config { line: 0, msg: "no methods given".into() });
        }
        Ok(cfg)
    }

    pub fn read_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }
}

/// One CSV row. Group means use status `mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub k: usize,
    pub method: String,
    pub status: String,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap_pct: Option<f64>,
    pub time_ms: Option<f64>,
    pub avdi: Option<BigRational>,
    pub midi: Option<BigRational>,
    /// Loop-free paths of the solution, when one was found.
    pub paths: Option<Vec<PathSeq>>,
}

impl ResultRow {
    fn new(instance: &str, k: usize, method: &str, status: &str) -> Self {
        ResultRow {
            instance: instance.to_string(),
            k,
            method: method.to_string(),
            status: status.to_string(),
            objective: None,
            bound: None,
            gap_pct: None,
            time_ms: None,
            avdi: None,
            midi: None,
            paths: None,
        }
    }

    pub fn to_csv(&self) -> String {
        fn num(v: Option<f64>, prec: usize) -> String {
            v.map_or(String::new(), |x| {
                if x == x.round() && x.abs() < 1e15 {
                    format!("{}", x as i64)
                } else {
                    format!("{x:.prec$}")
                }
            })
        }
        let three = |r: &Option<BigRational>| r.as_ref().map_or(String::new(), |r| format!("{:.3}", to_3dp(r)));
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.k,
            self.method,
            self.status,
            num(self.objective, 6),
            num(self.bound, 6),
            self.gap_pct.map_or(String::new(), |g| format!("{g:.2}")),
            self.time_ms.map_or(String::new(), |t| format!("{t:.1}")),
            three(&self.avdi),
            three(&self.midi),
        )
    }
}

fn score(row: &mut ResultRow, paths: Vec<PathSeq>) {
    row.avdi = avdi(&paths);
    row.midi = midi(&paths);
    row.paths = Some(paths);
}

/// Solve one (instance, K, method) item. Failures become error statuses.
pub fn solve_one(
    net: &DirectedNetwork,
    instance: &str,
    k: usize,
    method: &Method,
    time_limit: Duration,
    alpha: Rational64,
) -> ResultRow {
    let label = method.to_string();
    let mut row = ResultRow::new(instance, k, &label, "");
    let started = Instant::now();
    match method {
        Method::Ipm => match ipm(net, k, alpha) {
            Ok(paths) => {
                row.status = "heuristic".into();
                row.time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
                score(&mut row, paths);
            }
            Err(_) => row.status = "infeasible".into(),
        },
        Method::Milp { presence, .. } => {
            let bound = if *presence {
                match rstar_flow(net, k) {
                    Ok(r) => Some(r),
                    Err(_) => {
                        row.status = "infeasible".into();
                        return row;
                    }
                }
            } else {
                None
            };
            let kind = method.kind(bound).expect("milp method");
            let pm = match build(net, k, &kind) {
                Ok(pm) => pm,
                Err(_) => {
                    row.status = "build_error".into();
                    return row;
                }
            };
            let report = match solve_bb(&pm.model, Some(time_limit)) {
                Ok(r) => r,
                Err(_) => {
                    row.status = "solve_error".into();
                    return row;
                }
            };
            row.time_ms = Some(report.time_ms);
            row.status = report.status.as_str().into();
            if let Ok(lp) = solve_lp(&pm.model) {
                if lp.status == Status::Optimal {
                    row.bound = lp.objective;
                }
            }
            if let Some(z) = report.objective {
                row.objective = Some(z);
                row.gap_pct = row.bound.map(|b| gap(z, b));
                let values = report.values.as_deref().unwrap_or(&[]);
                match decode(values, &pm, net).ok().and_then(|raw| remove_loops(&raw.arc_sets, net).ok()) {
                    Some(paths) => score(&mut row, paths),
                    None => row.status = "decode_error".into(),
                }
            }
        }
    }
    row
}

fn mean(values: &[&BigRational]) -> Option<BigRational> {
    if values.is_empty() {
        return None;
    }
    let sum: BigRational = values.iter().copied().sum();
    Some(sum / BigRational::from_integer(BigInt::from(values.len())))
}

/// Per (group, K, method) means of AvDi and MiDi over rows that have them.
pub fn group_means(rows: &[ResultRow], group_of: impl Fn(&str) -> String) -> Vec<ResultRow> {
    let mut groups: BTreeMap<(String, usize, String), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.avdi.is_some()) {
        groups.entry((group_of(&r.instance), r.k, r.method.clone())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((g, k, method), members)| {
            let mut row = ResultRow::new(&g, k, &method, "mean");
            let av: Vec<&BigRational> = members.iter().filter_map(|r| r.avdi.as_ref()).collect();
            let mi: Vec<&BigRational> = members.iter().filter_map(|r| r.midi.as_ref()).collect();
            row.avdi = mean(&av);
            row.midi = mean(&mi);
            let times: Vec<f64> = members.iter().filter_map(|r| r.time_ms).collect();
            if !times.is_empty() {
                row.time_ms = Some(times.iter().sum::<f64>() / times.len() as f64);
            }
            row
        })
        .collect()
}

/// Run every (instance, K, method) item and return the rows in that order,
/// followed by the group means. Writes the CSV and paths files when configured.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let nets: Vec<Result<DirectedNetwork, String>> = cfg.instances.iter().map(InstanceSource::load).collect();
    let methods: Vec<Result<Method, String>> = cfg.methods.iter().map(|m| m.parse()).collect();
    let mut items = Vec::new();
    for i in 0..cfg.instances.len() {
        for &k in &cfg.ks {
            for j in 0..methods.len() {
                items.push((i, k, j));
            }
        }
    }
    let limit = Duration::from_millis(cfg.time_limit_ms);
    let rows: Vec<ResultRow> = par::with_workers(cfg.workers, || {
        par::map(Exec::Parallel, &items, |&(i, k, j)| {
            let id = cfg.instances[i].id();
            let label = methods[j].as_ref().map_or_else(|_| cfg.methods[j].clone(), Method::to_string);
            let net = match &nets[i] {
                Ok(n) => n,
                Err(_) => return ResultRow::new(&id, k, &label, "load_error"),
            };
            let method = match &methods[j] {
                Ok(m) => m,
                Err(_) => return ResultRow::new(&id, k, &label, "bad_method"),
            };
            if cfg.filter_disjoint && has_k_disjoint(net, k) {
                return ResultRow::new(&id, k, &label, "filtered");
            }
            solve_one(net, &id, k, method, limit, cfg.alpha)
        })
    });

    let group_by_id: BTreeMap<String, String> = cfg.instances.iter().map(|s| (s.id(), s.group())).collect();
    let means = group_means(&rows, |id| group_by_id.get(id).cloned().unwrap_or_else(|| id.to_string()));

    if let Some(dir) = &cfg.paths_dir {
        std::fs::create_dir_all(dir)?;
        for (row, &(i, _, _)) in rows.iter().zip(&items) {
            if let (Some(paths), Ok(net)) = (&row.paths, &nets[i]) {
                let name = format!("{}_K{}_{}.paths", row.instance, row.k, row.method.replace(':', "-"));
                std::fs::write(dir.join(name), write_paths(net, paths))?;
            }
        }
    }
    let mut all = rows;
    all.extend(means);
    if let Some(out) = &cfg.output {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(out, to_csv(&all))?;
    }
    Ok(all)
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Paths file: a version header, then one path per line as node ids.
pub fn write_paths(net: &DirectedNetwork, paths: &[PathSeq]) -> String {
    let mut out = format!("{PATHS_HEADER}\n");
    for p in paths {
        let nodes: Vec<String> = p.nodes(net).iter().map(usize::to_string).collect();
        out.push_str(&nodes.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_paths(net: &DirectedNetwork, text: &str) -> Result<Vec<PathSeq>, HarnessError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == PATHS_HEADER => {}
        Some((i, _)) => return Err(HarnessError::Paths { line: i + 1, msg: format!("expected `{PATHS_HEADER}`") }),
        None => return Err(HarnessError::Paths { line: 1, msg: "empty file".into() }),
    }
    let mut paths = Vec::new();
    for (i, l) in lines {
        let l = l.trim();
        if l.starts_with('#') {
            continue;
        }
        let err = |msg: String| HarnessError::Paths { line: i + 1, msg };
        let nodes: Vec<usize> =
            l.split_whitespace().map(|w| w.parse().map_err(|_| err(format!("bad node id `{w}`")))).collect::<Result<_, _>>()?;
        let p = PathSeq::from_nodes(net, &nodes).map_err(|e: GraphError| err(e.to_string()))?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_grid;

    #[test]
    fn method_names_round_trip() {
        for name in ["mao", "mao:drop", "mra", "mra:drop", "mro", "mar", "mar:noagg", "minmax", "mraa", "mroa", "mara", "ipm"] {
            let m: Method = name.parse().unwrap();
            assert_eq!(m.to_string(), name);
        }
        assert_eq!("MAR".parse::<Method>().unwrap().to_string(), "mar");
        assert!("maoa".parse::<Method>().is_err());
        assert!("mro:drop".parse::<Method>().is_err());
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn config_parsing() {
        let text = "# demo\ninstance = G_6_6, R_10_20_1..3\nk = 3..4\nmethod = mao, mar\nfilter_disjoint = yes\nalpha = 0.5\ntime_limit_ms = 1000 # short\n";
        let cfg = ExperimentConfig::parse(text, Path::new(".")).unwrap();
        assert_eq!(cfg.instances.len(), 4);
        assert_eq!(cfg.instances[3], InstanceSource::Spec(InstanceSpec::Random { n: 10, m: 20, seed: 3 }));
        assert_eq!(cfg.ks, vec![3, 4]);
        assert_eq!(cfg.methods, vec!["mao", "mar"]);
        assert!(cfg.filter_disjoint);
        assert_eq!(cfg.alpha, Rational64::new(1, 2));
        assert_eq!(cfg.time_limit_ms, 1000);
        for bad in ["k = 1\ninstance = G_2_2\nmethod = mao", "instance = G_2_2\nk = 2\nmethod = mao\ntime_limit_ms = 0", "what"] {
            assert!(ExperimentConfig::parse(bad, Path::new(".")).is_err(), "{bad}");
        }
        match ExperimentConfig::parse("instance = G_2_2\nbogus = 1\n", Path::new(".")) {
            Err(HarnessError::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn paths_file_round_trip() {
        let g = gen_grid(3, 3);
        let paths = vec![
            PathSeq::from_nodes(&g, &[1, 2, 3, 6, 9]).unwrap(),
            PathSeq::from_nodes(&g, &[1, 4, 7, 8, 9]).unwrap(),
        ];
        let text = write_paths(&g, &paths);
        assert!(text.starts_with("# kdp-paths v1\n1 2 3 6 9\n"));
        assert_eq!(read_paths(&g, &text).unwrap(), paths);
        assert!(read_paths(&g, "1 2 3\n").is_err());
        assert!(read_paths(&g, "# kdp-paths v1\n1 3 9\n").is_err());
    }

    #[test]
    fn filtered_and_error_rows() {
        let cfg = ExperimentConfig {
            instances: vec![InstanceSource::Spec(InstanceSpec::Grid { p: 3, q: 3 })],
            ks: vec![2, 3],
            methods: vec!["mar".into(), "bogus".into()],
            filter_disjoint: true,
            ..Default::default()
        };
        let rows = run_experiment(&cfg).unwrap();
        let statuses: Vec<(usize, &str, &str)> =
            rows.iter().map(|r| (r.k, r.method.as_str(), r.status.as_str())).collect();
        assert_eq!(
            statuses,
            vec![(2, "mar", "filtered"), (2, "bogus", "bad_method"), (3, "mar", "optimal"), (3, "bogus", "bad_method"), (3, "mar", "mean")]
        );
        assert_eq!(rows[2].objective, Some(2.0));
        assert_eq!(rows[2].gap_pct, Some(0.0));
        assert_eq!(rows[4].avdi, rows[2].avdi);
    }
}
