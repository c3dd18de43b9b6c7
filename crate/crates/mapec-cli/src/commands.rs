//! Command implementations: shared loading/resolution helpers plus one
//! function per subcommand.
//!
//! Failures are classified for the exit code: problems with flags, files,
//! or input formats exit 2; failures inside a computation exit 1.

use std::fs;
use std::path::Path;

use mapec::{
    aggregate_partition_flows, betweenness_centrality, community_based_centrality,
    community_hub_bridge, degree_centrality, degree_stats, effective_num_modules,
    epidemic_threshold, imprecision, linear_threshold_with, mec_all, mixing, modularity_vitality,
    optimize_two_level, pagerank, rewiring_experiment, selection_perplexity, sir_spreading_powers,
    CentralityVector, FlowField64, FlowModel, Graph64, NodeId, Partition, RewiringRecord,
    SearchConfig, SirConfig,
};

use crate::config::{ChbVariantKind, FlowKind, FormatKind, LtDirectionKind, MethodKind, RunConfig};
use crate::fmt::{round_sig6, sig6};
use crate::{CommonOpts, PChoice, PartitionSource};

/// Classified command failure; `code` is the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable files, or malformed input. Exit code 2.
    Usage(String),
    /// A computation failed on valid input. Exit code 1.
    Compute(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Compute(m) => m,
        }
    }
}

fn compute_err(e: mapec::Error) -> Failure {
    Failure::Compute(e.to_string())
}

/// Merges the configuration layers: built-in defaults, then the config
/// file (if any), then explicit flags.
pub fn resolve(common: &CommonOpts) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = read_file(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(input) = &common.input {
        cfg.input = Some(input.clone());
    }
    cfg.directed |= common.directed;
    if let Some(flow) = common.flow {
        cfg.flow = flow;
    }
    if let Some(rate) = common.teleport_rate {
        cfg.teleport_rate = rate;
    }
    if let Some(convention) = common.convention {
        cfg.convention = convention;
    }
    if !common.methods.is_empty() {
        cfg.methods = common.methods.clone();
    }
    if let Some(output) = &common.output {
        cfg.output = Some(output.clone());
    }
    if let Some(format) = common.format {
        cfg.format = format;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if cfg.methods.is_empty() {
        return Err(Failure::Usage("the method list is empty".into()));
    }
    if !(0.0..=1.0).contains(&cfg.teleport_rate) {
        return Err(Failure::Usage(format!(
            "teleport rate must lie in [0, 1], found {}",
            cfg.teleport_rate
        )));
    }
    Ok(cfg)
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.output {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_graph(cfg: &RunConfig) -> Result<Graph64, Failure> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Failure::Usage("no edge-list input given (argument or config `input`)".into()))?;
    let text = read_file(path)?;
    Graph64::parse_edge_list(&text, cfg.directed)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn flow_model(cfg: &RunConfig) -> Result<FlowModel, Failure> {
    if cfg.directed && cfg.flow == FlowKind::Raw {
        return Err(Failure::Usage(
            "raw flow needs an undirected graph; pick --flow node-tele or link-tele".into(),
        ));
    }
    Ok(cfg.flow.to_model(cfg.teleport_rate))
}

fn obtain_partition(
    g: &Graph64,
    flows: &FlowField64,
    source: &PartitionSource,
    cfg: &RunConfig,
) -> Result<Partition, Failure> {
    match &source.partition {
        Some(path) => {
            let text = read_file(path)?;
            Partition::parse(&text, g)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            let search = SearchConfig::with_runs(source.runs.unwrap_or(10), cfg.seed);
            let (m, _) = optimize_two_level(g, flows, &search).map_err(compute_err)?;
            Ok(m)
        }
    }
}

/// Everything the evaluation commands share: resolved config, graph, flows,
/// and (when any requested method or the command itself needs one) the
/// partition.
struct EvalContext {
    cfg: RunConfig,
    g: Graph64,
    flows: FlowField64,
    partition: Option<Partition>,
}

fn eval_context(
    common: &CommonOpts,
    source: &PartitionSource,
    partition_always: bool,
) -> Result<EvalContext, Failure> {
    let cfg = resolve(common)?;
    let g = load_graph(&cfg)?;
    let model = flow_model(&cfg)?;
    let flows = model.compute(&g).map_err(compute_err)?;
    let needs = partition_always || cfg.methods.iter().any(|m| m.needs_partition());
    let partition = if needs { Some(obtain_partition(&g, &flows, source, &cfg)?) } else { None };
    Ok(EvalContext { cfg, g, flows, partition })
}

fn method_scores(
    ctx: &EvalContext,
    method: MethodKind,
    chb: ChbVariantKind,
) -> Result<CentralityVector<f64>, Failure> {
    let partition =
        || ctx.partition.as_ref().expect("partition resolved for methods that need one");
    match method {
        MethodKind::Mec => {
            let pf = aggregate_partition_flows(
                &ctx.flows,
                partition(),
                ctx.cfg.convention.to_convention(),
            )
            .map_err(compute_err)?;
            Ok(mec_all(&pf))
        }
        MethodKind::Dc => degree_centrality(&ctx.g).map_err(compute_err),
        MethodKind::Bc => Ok(betweenness_centrality(&ctx.g)),
        MethodKind::Pr => pagerank(&ctx.g, ctx.cfg.teleport_rate).map_err(compute_err),
        MethodKind::Mv => modularity_vitality(&ctx.g, partition()).map_err(compute_err),
        MethodKind::Chb => {
            community_hub_bridge(&ctx.g, partition(), chb.to_variant()).map_err(compute_err)
        }
        MethodKind::Cbc => community_based_centrality(&ctx.g, partition()).map_err(compute_err),
    }
}

/// Quotes a CSV field only when it would otherwise break the row.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses `start:stop:step` (inclusive of both endpoints) or a comma list.
fn parse_sweep(spec: &str, name: &str) -> Result<Vec<f64>, Failure> {
    let bad =
        |detail: &str| Failure::Usage(format!("invalid {name} sweep {spec:?}: {detail}"));
    let parse_num = |token: &str| {
        token
            .trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("bad number {token:?}")))
    };
    let spec_trimmed = spec.trim();
    let values = if spec_trimmed.contains(':') {
        let parts: Vec<&str> = spec_trimmed.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (start, stop, step) = (parse_num(parts[0])?, parse_num(parts[1])?, parse_num(parts[2])?);
        if !(step > 0.0) {
            return Err(bad("step must be positive"));
        }
        if stop < start {
            return Err(bad("stop is below start"));
        }
        let mut xs = Vec::new();
        for k in 0.. {
            let x = start + step * k as f64;
            if x > stop + 1e-9 {
                break;
            }
            // Snap accumulated rounding at the far endpoint to `stop`.
            xs.push(if (x - stop).abs() <= 1e-9 { stop } else { x });
        }
        if xs.last().map_or(true, |&last| last != stop) {
            xs.push(stop);
        }
        xs
    } else {
        spec_trimmed
            .split(',')
            .map(parse_num)
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(bad("no values"));
    }
    Ok(values)
}

fn fraction_sweep(spec: &str) -> Result<Vec<f64>, Failure> {
    let xs = parse_sweep(spec, "fraction")?;
    for &x in &xs {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Failure::Usage(format!("fraction {x} outside (0, 1]")));
        }
    }
    Ok(xs)
}

/// Top-x selection size: round(x·n), at least 1, at most n.
fn seed_count(x: f64, n: usize) -> usize {
    ((x * n as f64).round() as usize).clamp(1, n)
}

fn resolve_p(g: &Graph64, p: &PChoice) -> Result<f64, Failure> {
    match p {
        // The epidemic threshold can exceed 1 on narrow degree
        // distributions; probabilities cap at 1.
        PChoice::Auto => Ok(epidemic_threshold(g).map_err(compute_err)?.min(1.0)),
        PChoice::Value(v) => Ok(*v),
    }
}

/// Sweep results as uniform `method,flow,x,value` rows.
struct SweepRows {
    rows: Vec<(&'static str, &'static str, f64, f64)>,
}

impl SweepRows {
    fn render(&self, format: FormatKind) -> String {
        match format {
            FormatKind::Csv => {
                let mut out = String::from("method,flow,x,value\n");
                for &(method, flow, x, value) in &self.rows {
                    out.push_str(&format!("{method},{flow},{},{}\n", sig6(x), sig6(value)));
                }
                out
            }
            FormatKind::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|&(method, flow, x, value)| {
                        serde_json::json!({
                            "method": method,
                            "flow": flow,
                            "x": round_sig6(x),
                            "value": round_sig6(value),
                        })
                    })
                    .collect();
                let mut out = serde_json::to_string(&rows).expect("plain JSON rows");
                out.push('\n');
                out
            }
        }
    }
}

pub fn cmd_partition(common: &CommonOpts, runs: Option<usize>) -> Result<(), Failure> {
    let cfg = resolve(common)?;
    let g = load_graph(&cfg)?;
    let model = flow_model(&cfg)?;
    let flows = model.compute(&g).map_err(compute_err)?;
    let search = SearchConfig::with_runs(runs.unwrap_or(10), cfg.seed);
    let (m, codelength) = optimize_two_level(&g, &flows, &search).map_err(compute_err)?;
    let mu = mixing(&g, &m).map_err(compute_err)?;
    let summary = format!(
        "{{\"codelength\":{},\"num_modules\":{},\"effective_modules\":{},\"mixing\":{}}}\n",
        sig6(codelength),
        m.leaf_count(),
        sig6(effective_num_modules(&m)),
        sig6(mu)
    );
    let tree = m.write(&g);
    match &cfg.output {
        Some(path) => {
            write_file(path, &tree)?;
            print!("{summary}");
        }
        // Without --output both artifacts go to stdout, partition first.
        None => print!("{tree}{summary}"),
    }
    Ok(())
}

pub fn cmd_centrality(
    common: &CommonOpts,
    source: &PartitionSource,
    chb: ChbVariantKind,
) -> Result<(), Failure> {
    let cfg = resolve(common)?;
    if cfg.methods.len() != 1 {
        return Err(Failure::Usage(format!(
            "centrality writes a single node,score table; got {} methods",
            cfg.methods.len()
        )));
    }
    let method = cfg.methods[0];
    let g = load_graph(&cfg)?;
    let flows = flow_model(&cfg)?.compute(&g).map_err(compute_err)?;
    let partition = if method.needs_partition() {
        Some(obtain_partition(&g, &flows, source, &cfg)?)
    } else {
        None
    };
    let ctx = EvalContext { cfg, g, flows, partition };
    let scores = method_scores(&ctx, method, chb)?;
    let text = match ctx.cfg.format {
        FormatKind::Csv => {
            let mut out = String::from("node,score\n");
            for u in scores.ranking() {
                out.push_str(&format!(
                    "{},{}\n",
                    csv_field(ctx.g.label(u)),
                    sig6(scores.score(u))
                ));
            }
            out
        }
        FormatKind::Json => {
            let rows: Vec<serde_json::Value> = scores
                .ranking()
                .into_iter()
                .map(|u| {
                    serde_json::json!({
                        "node": ctx.g.label(u),
                        "score": round_sig6(scores.score(u)),
                    })
                })
                .collect();
            let mut out = serde_json::to_string(&rows).expect("plain JSON rows");
            out.push('\n');
            out
        }
    };
    emit(&ctx.cfg, &text)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_lt(
    common: &CommonOpts,
    source: &PartitionSource,
    chb: ChbVariantKind,
    threshold: f64,
    fractions: &str,
    direction: LtDirectionKind,
) -> Result<(), Failure> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Failure::Usage(format!("threshold must lie in (0, 1], found {threshold}")));
    }
    let xs = fraction_sweep(fractions)?;
    let ctx = eval_context(common, source, false)?;
    let mut rows = Vec::new();
    for &method in &ctx.cfg.methods {
        let scores = method_scores(&ctx, method, chb)?;
        for &x in &xs {
            let seeds = scores.top(seed_count(x, ctx.g.node_count()));
            let outcome =
                linear_threshold_with(&ctx.g, &seeds, threshold, direction.to_direction())
                    .map_err(compute_err)?;
            rows.push((method.label(), ctx.cfg.flow.label(), x, outcome.activation_size));
        }
    }
    emit(&ctx.cfg, &SweepRows { rows }.render(ctx.cfg.format))
}

pub fn cmd_sir(common: &CommonOpts, p: &PChoice, reps: usize) -> Result<(), Failure> {
    let cfg = resolve(common)?;
    let g = load_graph(&cfg)?;
    let p = resolve_p(&g, p)?;
    let sir = SirConfig::new(p, reps, cfg.seed).map_err(|e| Failure::Usage(e.to_string()))?;
    let powers = sir_spreading_powers(&g, &sir).map_err(compute_err)?;
    let text = match cfg.format {
        FormatKind::Csv => {
            let mut out = String::from("node,power\n");
            for (u, &power) in powers.iter().enumerate() {
                out.push_str(&format!(
                    "{},{}\n",
                    csv_field(g.label(u as NodeId)),
                    sig6(power)
                ));
            }
            out
        }
        FormatKind::Json => {
            let rows: Vec<serde_json::Value> = powers
                .iter()
                .enumerate()
                .map(|(u, &power)| {
                    serde_json::json!({
                        "node": g.label(u as NodeId),
                        "power": round_sig6(power),
                    })
                })
                .collect();
            let mut out = serde_json::to_string(&rows).expect("plain JSON rows");
            out.push('\n');
            out
        }
    };
    emit(&cfg, &text)
}

pub fn cmd_imprecision(
    common: &CommonOpts,
    source: &PartitionSource,
    chb: ChbVariantKind,
    p: &PChoice,
    reps: usize,
    fractions: &str,
) -> Result<(), Failure> {
    let xs = fraction_sweep(fractions)?;
    let ctx = eval_context(common, source, false)?;
    let p = resolve_p(&ctx.g, p)?;
    let sir = SirConfig::new(p, reps, ctx.cfg.seed).map_err(|e| Failure::Usage(e.to_string()))?;
    let powers = sir_spreading_powers(&ctx.g, &sir).map_err(compute_err)?;
    let mut rows = Vec::new();
    for &method in &ctx.cfg.methods {
        let ranked = method_scores(&ctx, method, chb)?.ranking();
        for &x in &xs {
            let eps = imprecision(&ranked, &powers, x).map_err(compute_err)?;
            rows.push((method.label(), ctx.cfg.flow.label(), x, eps));
        }
    }
    emit(&ctx.cfg, &SweepRows { rows }.render(ctx.cfg.format))
}

pub fn cmd_perplexity(
    common: &CommonOpts,
    source: &PartitionSource,
    chb: ChbVariantKind,
    fractions: &str,
) -> Result<(), Failure> {
    let xs = fraction_sweep(fractions)?;
    let ctx = eval_context(common, source, true)?;
    let partition = ctx.partition.as_ref().expect("perplexity always resolves a partition");
    let mut rows = Vec::new();
    for &method in &ctx.cfg.methods {
        let scores = method_scores(&ctx, method, chb)?;
        for &x in &xs {
            let selected = scores.top(seed_count(x, ctx.g.node_count()));
            let perplexity = selection_perplexity(partition, &selected).map_err(compute_err)?;
            rows.push((method.label(), ctx.cfg.flow.label(), x, perplexity));
        }
    }
    emit(&ctx.cfg, &SweepRows { rows }.render(ctx.cfg.format))
}

pub fn cmd_rewire_exp(
    common: &CommonOpts,
    source: &PartitionSource,
    r_spec: &str,
    repeats: usize,
) -> Result<(), Failure> {
    let rs = parse_sweep(r_spec, "r")?;
    for &r in &rs {
        if !(0.0..=1.0).contains(&r) {
            return Err(Failure::Usage(format!("rewiring fraction {r} outside [0, 1]")));
        }
    }
    if repeats == 0 {
        return Err(Failure::Usage("rewire-exp needs at least one repeat".into()));
    }
    let ctx = eval_context(common, source, true)?;
    let truth = ctx.partition.as_ref().expect("rewire-exp always resolves a partition");
    let search = SearchConfig::with_runs(source.runs.unwrap_or(10), ctx.cfg.seed);
    let model = flow_model(&ctx.cfg)?;
    let records = rewiring_experiment(&ctx.g, truth, &rs, repeats, &search, model)
        .map_err(compute_err)?;
    let mut out = String::new();
    for record in &records {
        let rounded = RewiringRecord {
            r: round_sig6(record.r),
            ami: round_sig6(record.ami),
            tau: round_sig6(record.tau),
            mixing: round_sig6(record.mixing),
            mean_num_modules: round_sig6(record.mean_num_modules),
            effective_modules: round_sig6(record.effective_modules),
            repeats: record.repeats,
        };
        out.push_str(&serde_json::to_string(&rounded).expect("record serializes"));
        out.push('\n');
    }
    emit(&ctx.cfg, &out)
}

pub fn cmd_stats(common: &CommonOpts) -> Result<(), Failure> {
    let cfg = resolve(common)?;
    let g = load_graph(&cfg)?;
    let moments = degree_stats(&g).map_err(compute_err)?;
    // Narrow degree distributions make the threshold undefined; report null.
    let p_th = epidemic_threshold(&g).map(|v| sig6(v)).unwrap_or_else(|_| "null".into());
    let line = format!(
        "{{\"nodes\":{},\"links\":{},\"directed\":{},\"total_weight\":{},\"mean_degree\":{},\
         \"mean_square_degree\":{},\"epidemic_threshold\":{},\"self_loops_dropped\":{}}}\n",
        g.node_count(),
        g.link_count(),
        g.is_directed(),
        sig6(g.total_weight()),
        sig6(moments.mean_degree),
        sig6(moments.mean_square_degree),
        p_th,
        g.self_loops_dropped()
    );
    emit(&cfg, &line)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_sweeps_include_both_endpoints() {
        let xs = parse_sweep("0:1:0.25", "r").unwrap();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        // Steps that do not divide the range exactly still end at `stop`.
        let xs = parse_sweep("0.05:0.5:0.15", "fraction").unwrap();
        assert_eq!(*xs.last().unwrap(), 0.5);
        assert_eq!(xs.len(), 4);
        let xs = parse_sweep("0:0.3:0.2", "fraction").unwrap();
        assert_eq!(xs, vec![0.0, 0.2, 0.3]);
    }

    #[test]
    fn comma_sweeps_and_single_values_parse() {
        assert_eq!(parse_sweep("0.25", "fraction").unwrap(), vec![0.25]);
        assert_eq!(parse_sweep("0.1, 0.2,0.3", "fraction").unwrap(), vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn malformed_sweeps_are_usage_errors() {
        for spec in ["", "1:0:0.1", "0:1:0", "0:1", "a,b", "0:1:0.1:2"] {
            assert!(matches!(parse_sweep(spec, "r"), Err(Failure::Usage(_))), "spec {spec:?}");
        }
    }

    #[test]
    fn seed_counts_round_and_stay_in_range() {
        assert_eq!(seed_count(0.25, 8), 2);
        assert_eq!(seed_count(0.01, 8), 1);
        assert_eq!(seed_count(1.0, 8), 8);
        assert_eq!(seed_count(0.19, 8), 2);
    }

    #[test]
    fn csv_fields_quote_only_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
