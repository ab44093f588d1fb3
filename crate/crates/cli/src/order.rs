use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use nevorder::forms::is_hopf_pair;
use nevorder::growth::{
    DEFAULT_SAMPLES_PER_SHELL, DEFAULT_SHELLS_PER_DECADE,
};
use nevorder::hopf::DEFAULT_EPSILON;
use nevorder::order_fit::DEFAULT_WINDOW_FRACTION;
use nevorder::rng::purpose;
use nevorder::{
    builtin, fit_order, growth_series, HopfStratifiedSampler, MapSpec, MetricFormSpec, MetricKind,
    RadialGrid, RngStream, ShellSampler, UniformSampler,
};

use crate::config::{load_file, require_seed, Format, OrderArgs, SamplerChoice};
use crate::output::{document, metadata, write};
use crate::Failure;

pub const DEFAULT_R_MAX: f64 = 1000.0;
pub const DEFAULT_TOL: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct OrderConfig {
    pub command: &'static str,
    pub map: String,
    pub metric: String,
    pub sampler: String,
    pub seed: u64,
    pub r_min: f64,
    pub r_max: f64,
    pub shells_per_decade: usize,
    pub samples: usize,
    pub epsilon: f64,
    pub window_fraction: f64,
    pub format: Format,
    pub out: PathBuf,
    pub expect_order: Option<f64>,
    pub tol: Option<f64>,
}

fn resolve_map(name: &str, metric: Option<&str>) -> Result<(MapSpec, MetricFormSpec), Failure> {
    let (map, default_metric) = match builtin(name) {
        Some((map, metric)) => (map, Some(metric)),
        None => {
            let text = std::fs::read_to_string(name).map_err(|e| {
                Failure::config(format!("--map {name:?} is neither a builtin nor a readable file: {e}"))
            })?;
            (MapSpec::from_json(&text)?, None)
        }
    };
    let metric = match metric {
        Some(m) => {
            let kind = MetricKind::from_name(m)
                .ok_or_else(|| Failure::config(format!("unknown metric {m:?}")))?;
            MetricFormSpec::new(kind, map.target_dim())
        }
        None => default_metric
            .ok_or_else(|| Failure::config("--metric is required for maps read from a file"))?,
    };
    Ok((map, metric))
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::config(format!("--{name} must be positive, got {v}")))
    }
}

pub fn run(args: OrderArgs) -> Result<(), Failure> {
    let file = load_file(args.config.as_deref())?;
    let seed = require_seed(args.seed.or(file.seed))?;
    let map_name = args
        .map
        .or(file.map)
        .ok_or_else(|| Failure::config("--map is required"))?;
    let (map, metric) = resolve_map(&map_name, args.metric.or(file.metric).as_deref())?;

    let r_min = args.r_min.or(file.r_min).unwrap_or(1.0);
    let r_max = args.r_max.or(file.r_max).unwrap_or(DEFAULT_R_MAX);
    if !(r_min >= 1.0) || !(r_max > r_min) || !r_max.is_finite() {
        return Err(Failure::config(format!(
            "need 1 ≤ r_min < r_max, got r_min = {r_min}, r_max = {r_max}"
        )));
    }
    let shells_per_decade = args
        .shells_per_decade
        .or(file.shells_per_decade)
        .unwrap_or(DEFAULT_SHELLS_PER_DECADE);
    let samples = args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES_PER_SHELL);
    if samples == 0 || shells_per_decade == 0 {
        return Err(Failure::config("--samples and --shells-per-decade must be positive"));
    }
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Failure::config(format!("--epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let window_fraction = args
        .window_fraction
        .or(file.window_fraction)
        .unwrap_or(DEFAULT_WINDOW_FRACTION);
    let expect_order = args.expect_order.or(file.expect_order);
    let tol = match args.tol.or(file.tol) {
        Some(t) => Some(positive("tol", t)?),
        None => expect_order.map(|_| DEFAULT_TOL),
    };

    let hopf_pair = is_hopf_pair(&map, &metric);
    let choice = args.sampler.or(file.sampler).unwrap_or(SamplerChoice::Auto);
    let stratified = HopfStratifiedSampler { epsilon };
    let sampler: &dyn ShellSampler = match choice {
        SamplerChoice::Auto if hopf_pair => &stratified,
        SamplerChoice::Stratified => {
            if map.source_dim() != 2 {
                return Err(Failure::config("the stratified sampler needs a map on C^2"));
            }
            &stratified
        }
        _ => &UniformSampler,
    };

    let config = OrderConfig {
        command: "order",
        map: map_name,
        metric: metric.kind.name().to_string(),
        sampler: sampler.name().to_string(),
        seed,
        r_min,
        r_max,
        shells_per_decade,
        samples,
        epsilon,
        window_fraction,
        format: args.format.or(file.format).unwrap_or(Format::Csv),
        out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
        expect_order,
        tol,
    };

    let grid = RadialGrid::geometric(r_max, shells_per_decade)?;
    let series = growth_series(
        &map,
        &metric,
        &grid,
        sampler,
        samples,
        RngStream::new(seed, purpose::GROWTH),
    )?;
    let fit = fit_order(&series.restrict(r_min, r_max), window_fraction)?;

    match config.format {
        Format::Csv => write(&config.out, "growth.csv", &series.to_csv(&metadata(&config)))?,
        Format::Json => write(
            &config.out,
            "growth.json",
            &document(&config, json!({ "series": series })),
        )?,
    }
    write(&config.out, "order.json", &document(&config, json!({ "fit": fit.to_json_value() })))?;
    println!(
        "order estimate {:.4} (least-squares slope {:.4}) over r in [{}, {}]",
        fit.order_estimate, fit.slope, fit.window.0, fit.window.1
    );

    if let (Some(x), Some(t)) = (expect_order, tol) {
        if (fit.order_estimate - x).abs() > t {
            return Err(Failure::check(format!(
                "order estimate {} differs from expected {x} by more than {t}",
                fit.order_estimate
            )));
        }
    }
    Ok(())
}
