use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use beanrec_client::Client;
use beanrec_core::dataset::synthetic::{synthetic_csv, SyntheticConfig};
use beanrec_core::dataset::{
    clean, feature_selection_report, load_csv, pearson_matrix, write_cleaned_file, CoffeeRecord,
};
use beanrec_core::evaluation::{
    accuracy_sweep, cross_validate, percent_label, to_json, write_accuracy_tsv, write_cv_attribute_tsv,
    write_cv_tsv, CvReport, SweepConfig,
};
use beanrec_core::regressors::{
    grid_search_svr, random_search_mlp, Family, RegressorConfig, TrainedRegressor,
};
use beanrec_core::subjective::{Attribute, SubjectiveVector};
use beanrec_service::{AppState, ServiceConfig};

use crate::config::CliConfig;

pub struct Context {
    pub seed: u64,
    pub out: PathBuf,
    pub cfg: CliConfig,
}

impl Context {
    fn out_file(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).with_context(|| format!("cannot create {}", self.out.display()))?;
        Ok(self.out.join(name))
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.out_file(name)?;
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    fn records(&self, flag: Option<&Path>) -> Result<Vec<CoffeeRecord>> {
        let path = self.cfg.data(flag)?;
        let (records, log) = clean(&load_csv(&path)?);
        tracing::info!(path = %path.display(), retained = log.retained, dropped = log.total_dropped(), "dataset");
        if records.is_empty() {
            bail!("{} has no usable reviews", path.display());
        }
        Ok(records)
    }
}

pub fn ingest(ctx: &Context, input: &Path) -> Result<()> {
    let raw = load_csv(input)?;
    let (records, log) = clean(&raw);
    let cleaned = ctx.out_file("cleaned.csv")?;
    write_cleaned_file(&records, &cleaned)?;
    ctx.write("cleaning_log.tsv", log.to_string())?;
    ctx.write("cleaning_log.json", to_json(&log)?)?;
    println!(
        "{} rows read, {} retained, {} dropped -> {}",
        log.input_rows,
        log.retained,
        log.total_dropped(),
        cleaned.display()
    );
    if records.is_empty() {
        eprintln!("warning: no valid rows in {}", input.display());
        return Ok(());
    }
    if records.len() >= 3 {
        ctx.write("correlation.tsv", pearson_matrix(&records).to_tsv())?;
        let mut forest = ctx.cfg.forest.clone();
        forest.seed = ctx.seed;
        let (scores, _) = feature_selection_report(&raw, &forest)?;
        let mut tsv = String::from("feature\tunivariate_f\timportance\tretained\n");
        for s in &scores {
            tsv.push_str(&format!("{}\t{:.4}\t{:.6}\t{}\n", s.feature, s.univariate, s.importance, s.retained));
        }
        ctx.write("feature_selection.tsv", tsv)?;
    }
    Ok(())
}

/// Final model configuration: SVR parameters come from the grid unless the
/// config pins them; MLP can be random-searched.
fn tuned_config(
    ctx: &Context,
    family: Family,
    records: &[CoffeeRecord],
    folds: usize,
    search: Option<usize>,
) -> Result<RegressorConfig> {
    let base = ctx.cfg.regressor(family, ctx.seed);
    match (family, base) {
        (Family::Svr, RegressorConfig::Svr(svr)) if !ctx.cfg.svr_fixed => {
            eprintln!("searching SVR grid ({folds}-fold)...");
            let grid = grid_search_svr(records, &ctx.cfg.svr_grid, &svr, folds, ctx.seed)?;
            ctx.write("svr_grid.json", to_json(&grid)?)?;
            Ok(RegressorConfig::Svr(grid.config))
        }
        (Family::Mlp, base @ RegressorConfig::Mlp(_)) => match search {
            Some(budget) => {
                eprintln!("random search over {budget} MLP configurations ({folds}-fold)...");
                let res = random_search_mlp(records, &ctx.cfg.mlp_search, budget, folds, ctx.seed)?;
                ctx.write("mlp_search.json", to_json(&res)?)?;
                Ok(RegressorConfig::Mlp(res.best))
            }
            None => Ok(base),
        },
        (_, base) => Ok(base),
    }
}

pub fn train(ctx: &Context, family: Family, data: Option<&Path>, folds: usize, search: Option<usize>) -> Result<()> {
    if search.is_some() && family != Family::Mlp {
        bail!("--search only applies to the mlp family");
    }
    let records = ctx.records(data)?;
    let config = tuned_config(ctx, family, &records, folds, search)?;
    let model = TrainedRegressor::train(&records, &config)?;
    for w in &model.metadata.notes.warnings {
        eprintln!("warning: {w}");
    }
    let path = ctx.out_file(&format!("model-{}.json", family.name()))?;
    model.save(&path)?;
    println!("{} model trained on {} records -> {}", family, records.len(), path.display());
    Ok(())
}

pub fn evaluate(ctx: &Context, families: &[Family], data: Option<&Path>, folds: usize) -> Result<()> {
    let records = ctx.records(data)?;
    let mut reports: Vec<CvReport> = Vec::new();
    for &family in families {
        let config = tuned_config(ctx, family, &records, folds, None)?;
        eprintln!("cross-validating {family} ({folds}-fold)...");
        reports.push(cross_validate(&records, &config, folds, ctx.seed)?);
    }
    ctx.write("cv.json", to_json(&reports)?)?;
    let mut table = Vec::new();
    write_cv_tsv(&reports, &mut table)?;
    ctx.write("cv.tsv", &table)?;
    let mut attrs = Vec::new();
    write_cv_attribute_tsv(&reports, &mut attrs)?;
    ctx.write("cv_attributes.tsv", &attrs)?;
    print!("{}", String::from_utf8_lossy(&table));
    Ok(())
}

pub fn simulate(ctx: &Context, family: Family, data: Option<&Path>, sweep: &SweepConfig) -> Result<()> {
    let records = ctx.records(data)?;
    let config = ctx.cfg.regressor(family, ctx.seed);
    let report = accuracy_sweep(&records, &config, sweep)?;
    ctx.write("accuracy.json", to_json(&report)?)?;
    let mut table = Vec::new();
    write_accuracy_tsv(&report, &mut table)?;
    ctx.write("accuracy.tsv", &table)?;
    print!("{}", String::from_utf8_lossy(&table));
    for row in &report.rows {
        tracing::info!(m = %percent_label(row.m), hidden = row.hidden, "per repetition {:?}", row.per_repetition);
    }
    Ok(())
}

/// One optional flag per attribute; unset ones default to the space medians.
#[derive(Debug, clap::Args)]
pub struct PreferenceArgs {
    #[arg(long)]
    aroma: Option<f64>,
    #[arg(long)]
    flavour: Option<f64>,
    #[arg(long)]
    body: Option<f64>,
    #[arg(long)]
    sweetness: Option<f64>,
    #[arg(long)]
    acidity: Option<f64>,
    #[arg(long)]
    balance: Option<f64>,
    #[arg(long)]
    uniformity: Option<f64>,
    #[arg(long)]
    aftertaste: Option<f64>,
}

impl PreferenceArgs {
    fn values(&self) -> [Option<f64>; 8] {
        [
            self.aroma,
            self.flavour,
            self.body,
            self.sweetness,
            self.acidity,
            self.balance,
            self.uniformity,
            self.aftertaste,
        ]
    }
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("cannot start async runtime")
}

pub fn recommend(url: &str, k: Option<usize>, prefs: &PreferenceArgs) -> Result<()> {
    runtime()?.block_on(async {
        let client = Client::new(url);
        let given = prefs.values();
        let u = if given.iter().all(Option::is_some) {
            SubjectiveVector::from_array(given.map(|v| v.unwrap_or_default()))
        } else {
            let medians = client.metadata().await?.medians.to_array();
            let mut a = [0.0; 8];
            for (i, v) in a.iter_mut().enumerate() {
                *v = given[i].unwrap_or(medians[i]);
            }
            SubjectiveVector::from_array(a)
        };
        let resp = client.recommend(u, k).await?;
        println!("rank\tbean_id\tmatch\tdistance\tprovenance\tcountry\tvariety\tprocessing");
        for r in &resp.recommendations {
            println!(
                "{}\t{}\t{:.1}%\t{:.4}\t{}\t{}\t{}\t{}",
                r.rank,
                r.bean_id,
                r.match_score * 100.0,
                r.distance,
                r.provenance.name(),
                r.meta.country_of_origin,
                r.meta.variety,
                r.meta.processing_method
            );
        }
        let labels: Vec<String> = Attribute::ALL
            .iter()
            .zip(u.to_array())
            .map(|(a, v)| format!("{}={v}", a.name()))
            .collect();
        eprintln!("query: {}", labels.join(" "));
        Ok(())
    })
}

pub struct ServeOverrides {
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub unreviewed: Option<PathBuf>,
    pub hidden_fraction: Option<f64>,
    pub bind: Option<SocketAddr>,
    pub dev_cors: bool,
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p
    }
}

pub fn serve(ctx: &Context, o: ServeOverrides) -> Result<()> {
    let mut cfg = match ctx.cfg.service.clone() {
        Some(mut s) => {
            s.dataset = resolve(&ctx.cfg.base, s.dataset);
            s.model = resolve(&ctx.cfg.base, s.model);
            s.unreviewed = s.unreviewed.map(|p| resolve(&ctx.cfg.base, p));
            s
        }
        None => {
            let data = o.data.clone().or_else(|| ctx.cfg.data.clone()).context("serve needs --data or a [service] config section")?;
            let model = o.model.clone().context("serve needs --model or a [service] config section")?;
            ServiceConfig::new(data, model)
        }
    };
    if let Some(d) = o.data {
        cfg.dataset = d;
    }
    if let Some(m) = o.model {
        cfg.model = m;
    }
    if o.unreviewed.is_some() {
        cfg.unreviewed = o.unreviewed;
    }
    if o.hidden_fraction.is_some() {
        cfg.hidden_fraction = o.hidden_fraction;
    }
    if let Some(b) = o.bind {
        cfg.bind = b;
    }
    cfg.dev_cors |= o.dev_cors;
    cfg.seed = ctx.seed;
    cfg.validate()?;

    let bind = cfg.bind;
    let dev_cors = cfg.dev_cors;
    runtime()?.block_on(async move {
        let state = tokio::task::spawn_blocking(move || AppState::load(cfg)).await??;
        let cur = state.current();
        eprintln!(
            "serving {} beans ({} predicted) on http://{bind}",
            cur.space.len(),
            cur.predicted
        );
        drop(cur);
        spawn_reload_on_hangup(state.clone());
        beanrec_service::serve(state, bind, dev_cors, None, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        Ok(())
    })
}

#[cfg(unix)]
fn spawn_reload_on_hangup(state: AppState) {
    use tokio::signal::unix::{signal, SignalKind};
    let Ok(mut hup) = signal(SignalKind::hangup()) else {
        return;
    };
    tokio::spawn(async move {
        while hup.recv().await.is_some() {
            match state.reload().await {
                Ok(fp) => tracing::info!(fingerprint = %fp, "space reloaded"),
                Err(e) => tracing::error!(error = %e, "reload failed, keeping the current space"),
            }
        }
    });
}

#[cfg(not(unix))]
fn spawn_reload_on_hangup(_: AppState) {}

pub fn synth(ctx: &Context, rows: usize) -> Result<()> {
    let csv = synthetic_csv(&SyntheticConfig {
        rows,
        seed: ctx.seed,
        ..Default::default()
    });
    let path = ctx.write("synthetic_cqi.csv", csv)?;
    println!("{rows} synthetic rows -> {}", path.display());
    Ok(())
}
