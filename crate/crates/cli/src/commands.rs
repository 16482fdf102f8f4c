use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use hyperrank::eval::{evaluate, pearson, EvalReport, JunkMask, SynthSpec};
use hyperrank::fusion::{lhrr_pipeline, FusionConfig, FusionRun};
use hyperrank::io::{
    load_collection, load_distances, load_ranked_lists, save_collection, save_ranked_lists,
};
use hyperrank::rank::{default_depth, rank_from_distances, Collection, RankerOutput};
use hyperrank::selection::{correlate_all, estimate_all, select, Selection, SelectionConfig};
use serde::Serialize;

use crate::args::{Cli, Command, SynthKind};
use crate::config::{ConfigFile, Settings};
use crate::error::{CliError, Result, StageExt};
use crate::output::{
    display_name, write_csv, write_json, Artifacts, FeatureWeights, FusedArtifact, Manifest,
    Timings,
};

/// Resolve settings and run `cli` on a pool of the configured size.
pub fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let knobs = match &cli.command {
        Command::Rank(k)
        | Command::Correlate(k)
        | Command::Select(k)
        | Command::Run(k)
        | Command::Eval(k) => k,
        Command::Estimate { knobs, .. }
        | Command::Fuse { knobs, .. }
        | Command::Synth { knobs, .. }
        | Command::Report { knobs, .. } => knobs,
    };
    let settings = Settings::resolve(&file, knobs, cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Rank(_) => rank(&settings),
        Command::Estimate { per_query, .. } => estimate(&settings, *per_query),
        Command::Correlate(_) => correlate(&settings),
        Command::Select(_) => select_cmd(&settings),
        Command::Fuse { selection, row, .. } => fuse(&settings, selection.as_deref(), *row),
        Command::Run(_) => run(&settings),
        Command::Eval(_) => eval(&settings),
        Command::Synth {
            kind,
            classes,
            items_per_class,
            noise,
            ..
        } => synth(&settings, *kind, *classes, *items_per_class, noise),
        Command::Report { k_values, .. } => report(&settings, k_values),
    })
}

fn ranker_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| display_name(path))
}

fn require_collection(settings: &Settings) -> Result<Collection> {
    let path = settings
        .collection
        .as_ref()
        .ok_or_else(|| CliError::Usage("no collection given (--collection or `collection =`)".into()))?;
    load_collection(path).stage("load")
}

/// Collection plus every ranker named by `rankers` and `distances`.
fn load_inputs(settings: &Settings) -> Result<(Collection, Vec<RankerOutput>)> {
    let collection = require_collection(settings)?;
    let n = collection.len();
    let mut rankers = Vec::new();
    for path in &settings.rankers {
        rankers.push(load_ranked_lists(path, &collection).stage("load")?);
    }
    let list_depth = default_depth(n).max(settings.depth.unwrap_or(0)).min(n);
    for path in &settings.distances {
        let d = load_distances(path).stage("load")?;
        if d.size() != n {
            return Err(CliError::Stage {
                stage: "load",
                source: hyperrank::Error::Mismatch(format!(
                    "{} has {} items, collection has {n}",
                    path.display(),
                    d.size()
                )),
            });
        }
        rankers.push(rank_from_distances(ranker_id(path), &d, list_depth).stage("rank")?);
    }
    if rankers.is_empty() {
        return Err(CliError::Usage("no rankers given (--rankers or --distances)".into()));
    }
    let mut seen = BTreeSet::new();
    for r in &rankers {
        if !seen.insert(r.id().to_string()) {
            return Err(format_error("load", format!("ranker id {} appears twice", r.id())));
        }
        if r.depth() != rankers[0].depth() {
            return Err(format_error(
                "load",
                format!(
                    "ranker {} has depth {}, ranker {} has {}; all rankers must share one depth",
                    r.id(),
                    r.depth(),
                    rankers[0].id(),
                    rankers[0].depth()
                ),
            ));
        }
    }
    Ok((collection, rankers))
}

fn format_error(stage: &'static str, msg: String) -> CliError {
    CliError::Stage {
        stage,
        source: hyperrank::Error::Format(msg),
    }
}

fn selection_config(s: &Settings) -> SelectionConfig {
    SelectionConfig {
        k: s.k,
        alpha: s.alpha,
        beta: s.beta,
        top_pairs: s.top_pairs,
        sizes: s.sizes.clone(),
        aggregation: s.aggregation,
        rbo_variant: s.rbo,
    }
}

fn fusion_config(s: &Settings, rankers: &[RankerOutput]) -> FusionConfig {
    let n = rankers[0].size();
    let depth = match s.depth {
        Some(d) => d,
        None => s.fusion_depth(n).min(rankers[0].depth()).max(s.k.min(n)),
    };
    FusionConfig {
        k: s.k,
        depth,
        iterations: s.iterations,
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn rank(s: &Settings) -> Result<()> {
    let collection = require_collection(s)?;
    if s.distances.is_empty() {
        return Err(CliError::Usage("rank needs --distances".into()));
    }
    let mut out = Artifacts::new(&s.output)?;
    for path in &s.distances {
        let d = load_distances(path).stage("load")?;
        let depth = s.depth.unwrap_or(default_depth(d.size()));
        let r = rank_from_distances(ranker_id(path), &d, depth).stage("rank")?;
        let dest = out.path(format!("{}.txt", r.id()));
        save_ranked_lists(&r, &collection, &dest).stage("rank")?;
    }
    Ok(())
}

fn write_gammas(path: &Path, qpp: &[hyperrank::qpp::QppScores]) -> Result<()> {
    write_csv(
        path,
        &["ranker_id", "gamma"],
        qpp.iter().map(|q| [q.ranker_id.clone(), num(q.ranker_score)]),
    )
}

fn estimate(s: &Settings, per_query: bool) -> Result<()> {
    let (collection, rankers) = load_inputs(s)?;
    let qpp = estimate_all(&rankers, s.k, s.aggregation).stage("estimate")?;
    let mut out = Artifacts::new(&s.output)?;
    write_gammas(&out.path("gamma.csv"), &qpp)?;
    if per_query {
        let rows = qpp.iter().flat_map(|q| {
            q.per_query.iter().enumerate().map(|(i, &g)| {
                [q.ranker_id.clone(), collection.id(i).to_string(), num(g)]
            })
        });
        write_csv(&out.path("gamma_per_query.csv"), &["ranker_id", "query_id", "gamma"], rows)?;
    }
    Ok(())
}

fn write_correlations(path: &Path, correlations: &[(String, String, f64)]) -> Result<()> {
    write_csv(
        path,
        &["ranker_a", "ranker_b", "rbo"],
        correlations.iter().map(|(a, b, l)| [a.clone(), b.clone(), num(*l)]),
    )
}

fn correlate(s: &Settings) -> Result<()> {
    let (_, rankers) = load_inputs(s)?;
    let cfg = selection_config(s).correlation();
    let correlations = correlate_all(&rankers, &cfg).stage("correlate")?;
    let mut out = Artifacts::new(&s.output)?;
    write_correlations(&out.path("rbo.csv"), &correlations)
}

fn write_selection(out: &mut Artifacts, sel: &Selection) -> Result<()> {
    let pairs = sel.pairs.iter().enumerate().map(|(i, p)| {
        [
            (i + 1).to_string(),
            p.pair.first.clone(),
            p.pair.second.clone(),
            num(p.effectiveness_product),
            num(p.correlation),
            num(p.weight),
        ]
    });
    write_csv(
        &out.path("pairs.csv"),
        &["rank", "ranker_a", "ranker_b", "gamma_product", "rbo", "weight"],
        pairs,
    )?;
    for (n, combos) in &sel.combinations {
        if combos.is_empty() {
            eprintln!("warning: no combination of size {n} is reachable from the top pairs");
        }
        let rows = combos
            .iter()
            .enumerate()
            .map(|(i, c)| [(i + 1).to_string(), c.members.join(" "), num(c.score)]);
        write_csv(&out.path(format!("selection_n{n}.csv")), &["rank", "members", "score"], rows)?;
    }
    Ok(())
}

fn select_cmd(s: &Settings) -> Result<()> {
    let (_, rankers) = load_inputs(s)?;
    let sel = select(&rankers, &selection_config(s)).stage("select")?;
    let mut out = Artifacts::new(&s.output)?;
    write_selection(&mut out, &sel)
}

fn members_from_selection(path: &Path, row: usize) -> Result<Vec<String>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        if record.get(0) == Some(row.to_string().as_str()) {
            let members = record.get(1).unwrap_or("");
            return Ok(members.split_whitespace().map(str::to_string).collect());
        }
    }
    Err(format_error("fuse", format!("{} has no row {row}", path.display())))
}

fn pick_rankers(rankers: &[RankerOutput], members: &[String]) -> Result<Vec<RankerOutput>> {
    members
        .iter()
        .map(|m| {
            rankers
                .iter()
                .find(|r| r.id() == m)
                .cloned()
                .ok_or_else(|| format_error("fuse", format!("selected ranker {m} was not loaded")))
        })
        .collect()
}

fn fused_artifact(file: String, members: Vec<String>, run: &FusionRun) -> FusedArtifact {
    FusedArtifact {
        file,
        members,
        features: run
            .features
            .iter()
            .map(|f| FeatureWeights {
                ranker_id: f.ranker_id.clone(),
                mean_edge_weight: f.mean_edge_weight,
                min_edge_weight: f.min_edge_weight,
                max_edge_weight: f.max_edge_weight,
            })
            .collect(),
    }
}

fn fuse(s: &Settings, selection: Option<&Path>, row: usize) -> Result<()> {
    let mut timings = Timings::start();
    let (collection, rankers) = timings.time("load", || load_inputs(s))?;
    let chosen = match selection {
        Some(path) => pick_rankers(&rankers, &members_from_selection(path, row)?)?,
        None => rankers,
    };
    let cfg = fusion_config(s, &chosen);
    let run = timings.time("fuse", || lhrr_pipeline(&chosen, &cfg).stage("fuse"))?;
    let mut out = Artifacts::new(&s.output)?;
    let path = out.path("fused.txt");
    save_ranked_lists(&run.fused, &collection, &path).stage("fuse")?;
    let mut manifest = Manifest::new("fuse", s)?;
    let members = chosen.iter().map(|r| r.id().to_string()).collect();
    manifest.fused.push(fused_artifact("fused.txt".into(), members, &run));
    finish(out, manifest, &timings)
}

fn finish(mut out: Artifacts, mut manifest: Manifest, timings: &Timings) -> Result<()> {
    let manifest_path = out.path("manifest.json");
    manifest.artifacts = out.names();
    write_json(&manifest_path, &manifest)?;
    timings.write(&out.dir().join("timings.json"))
}

#[derive(Serialize)]
struct RankerEval {
    id: String,
    map: f64,
    r1: f64,
    valid_queries: usize,
    excluded: usize,
    cmc: Vec<f64>,
}

#[derive(Serialize)]
struct EvalSummary {
    protocol: String,
    rankers: Vec<RankerEval>,
}

fn evaluate_all(
    s: &Settings,
    collection: &Collection,
    rankers: &[&RankerOutput],
) -> Result<Vec<(String, EvalReport)>> {
    let mask = JunkMask::for_protocol(s.protocol, collection).stage("eval")?;
    rankers
        .iter()
        .map(|r| Ok((r.id().to_string(), evaluate(r, collection, Some(&mask)).stage("eval")?)))
        .collect()
}

fn write_eval(out: &mut Artifacts, s: &Settings, collection: &Collection, reports: &[(String, EvalReport)]) -> Result<()> {
    let summary = EvalSummary {
        protocol: s.protocol.to_string(),
        rankers: reports
            .iter()
            .map(|(id, r)| RankerEval {
                id: id.clone(),
                map: r.map_score,
                r1: r.r1(),
                valid_queries: r.valid_queries(),
                excluded: r.excluded,
                cmc: r.cmc.clone(),
            })
            .collect(),
    };
    write_json(&out.path("eval.json"), &summary)?;
    let rows = reports.iter().flat_map(|(id, r)| {
        r.per_query_ap.iter().enumerate().map(move |(q, ap)| {
            [
                id.clone(),
                collection.id(q).to_string(),
                ap.map(num).unwrap_or_default(),
            ]
        })
    });
    write_csv(&out.path("ap.csv"), &["ranker_id", "query_id", "ap"], rows)
}

fn eval(s: &Settings) -> Result<()> {
    let (collection, rankers) = load_inputs(s)?;
    let refs: Vec<&RankerOutput> = rankers.iter().collect();
    let reports = evaluate_all(s, &collection, &refs)?;
    let mut out = Artifacts::new(&s.output)?;
    write_eval(&mut out, s, &collection, &reports)
}

fn run(s: &Settings) -> Result<()> {
    let mut timings = Timings::start();
    let (collection, rankers) = timings.time("load", || load_inputs(s))?;
    let sel = timings.time("select", || select(&rankers, &selection_config(s)).stage("select"))?;
    let mut out = Artifacts::new(&s.output)?;
    write_gammas(&out.path("gamma.csv"), &sel.qpp)?;
    write_correlations(&out.path("rbo.csv"), &sel.correlations)?;
    write_selection(&mut out, &sel)?;

    let mut manifest = Manifest::new("run", s)?;
    let cfg = fusion_config(s, &rankers);
    let mut fused = Vec::new();
    for (n, combos) in &sel.combinations {
        let Some(best) = combos.first() else { continue };
        let chosen = pick_rankers(&rankers, &best.members)?;
        let run = timings.time("fuse", || lhrr_pipeline(&chosen, &cfg).stage("fuse"))?;
        let name = format!("fused_n{n}");
        let file = format!("{name}.txt");
        let result = run.fused.clone().with_id(name);
        save_ranked_lists(&result, &collection, &out.path(file.clone())).stage("fuse")?;
        manifest.fused.push(fused_artifact(file, best.members.clone(), &run));
        fused.push(result);
    }

    if collection.labels().is_some() {
        let refs: Vec<&RankerOutput> = rankers.iter().chain(&fused).collect();
        let reports = timings.time("eval", || evaluate_all(s, &collection, &refs))?;
        write_eval(&mut out, s, &collection, &reports)?;
    }
    finish(out, manifest, &timings)
}

fn synth(s: &Settings, kind: SynthKind, classes: usize, ipc: usize, noise: &[f64]) -> Result<()> {
    let mut spec = match kind {
        SynthKind::Graded => SynthSpec::graded(classes, ipc, noise, s.seed),
        SynthKind::Complementary => SynthSpec::complementary(classes, ipc, s.seed),
    };
    spec.depth = s.depth;
    let (collection, rankers) = hyperrank::eval::generate_synthetic(&spec).stage("synth")?;
    let mut out = Artifacts::new(&s.output)?;
    save_collection(&collection, out.path("collection.tsv")).stage("synth")?;
    crate::output::create_dir(&out.dir().join("rankers"))?;
    let mut conf = String::from("collection = collection.tsv\nrankers =");
    for r in &rankers {
        let name = format!("rankers/{}.txt", r.id());
        save_ranked_lists(r, &collection, out.path(name.clone())).stage("synth")?;
        conf.push(' ');
        conf.push_str(&name);
    }
    conf.push('\n');
    crate::output::write_file(&out.path("synth.conf"), conf.as_bytes())
}

#[derive(Serialize)]
struct ReportSummary {
    pearson_gamma_map: Option<f64>,
    best_individual_map: f64,
    k_sweep_relative_range: f64,
}

fn map_only(run: &FusionRun, collection: &Collection) -> Result<EvalReport> {
    evaluate(&run.fused, collection, None).stage("eval")
}

fn report(s: &Settings, k_values: &[usize]) -> Result<()> {
    let (collection, rankers) = load_inputs(s)?;
    if rankers.len() < 2 {
        return Err(CliError::Usage("report needs at least two rankers".into()));
    }
    let refs: Vec<&RankerOutput> = rankers.iter().collect();
    let individual: HashMap<String, f64> = evaluate_all(s, &collection, &refs)?
        .into_iter()
        .map(|(id, r)| (id, r.map_score))
        .collect();
    let mut out = Artifacts::new(&s.output)?;

    let base = SelectionConfig {
        sizes: vec![2],
        ..selection_config(s)
    };
    let sel = select(&rankers, &base).stage("select")?;
    let gammas: Vec<f64> = sel.qpp.iter().map(|q| q.ranker_score).collect();
    let maps: Vec<f64> = sel.qpp.iter().map(|q| individual[&q.ranker_id]).collect();
    write_csv(
        &out.path("hqpp_vs_map.csv"),
        &["ranker_id", "gamma", "map"],
        sel.qpp
            .iter()
            .zip(&maps)
            .map(|(q, m)| [q.ranker_id.clone(), num(q.ranker_score), num(*m)]),
    )?;

    let cfg = fusion_config(s, &rankers);
    let mut rows = Vec::new();
    let mut running = 0.0;
    for (i, p) in sel.pairs.iter().enumerate() {
        let chosen = pick_rankers(&rankers, &[p.pair.first.clone(), p.pair.second.clone()])?;
        let fused = map_only(&lhrr_pipeline(&chosen, &cfg).stage("fuse")?, &collection)?;
        running += fused.map_score;
        let pair_mean = (individual[&p.pair.first] + individual[&p.pair.second]) / 2.0;
        rows.push([
            (i + 1).to_string(),
            p.pair.first.clone(),
            p.pair.second.clone(),
            num(p.weight),
            num(pair_mean),
            num(fused.map_score),
            num(running / (i + 1) as f64),
        ]);
    }
    write_csv(
        &out.path("top_pairs.csv"),
        &["rank", "ranker_a", "ranker_b", "weight", "pair_mean_map", "fused_map", "mean_fused_map_top"],
        rows,
    )?;

    let mut sweep = Vec::new();
    let mut sweep_maps = Vec::new();
    for &k in k_values {
        let ks = Settings { k, ..s.clone() };
        ks.validate()?;
        let sel = select(&rankers, &SelectionConfig { k, ..base.clone() }).stage("select")?;
        let top = &sel.pairs[0].pair;
        let chosen = pick_rankers(&rankers, &[top.first.clone(), top.second.clone()])?;
        let kcfg = FusionConfig { k, ..fusion_config(&ks, &rankers) };
        let fused = map_only(&lhrr_pipeline(&chosen, &kcfg).stage("fuse")?, &collection)?;
        sweep_maps.push(fused.map_score);
        sweep.push([
            k.to_string(),
            format!("{} {}", top.first, top.second),
            num(fused.map_score),
            num(fused.r1()),
        ]);
    }
    write_csv(&out.path("k_sweep.csv"), &["k", "members", "fused_map", "fused_r1"], sweep)?;

    let hi = sweep_maps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = sweep_maps.iter().copied().fold(f64::INFINITY, f64::min);
    let summary = ReportSummary {
        pearson_gamma_map: pearson(&gammas, &maps).ok(),
        best_individual_map: maps.iter().copied().fold(0.0, f64::max),
        k_sweep_relative_range: if hi > 0.0 { (hi - lo) / hi } else { 0.0 },
    };
    write_json(&out.path("report.json"), &summary)
}
