use std::path::PathBuf;

use clap::Args;
use grasp_core::io::{read_dataset_jsonl, write_model_json};
use grasp_core::model::{fit_model, GraspDataset, PriorLabelFilter};

use crate::context::Context;
use crate::errors::CliError;

#[derive(Args)]
pub struct TrainArgs {
    /// JSON-lines training dataset.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Output model file.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    /// Restrict training to these comma-separated type names (a single name
    /// yields a type-free-style model).
    #[arg(long, value_delimiter = ',')]
    pub types: Option<Vec<String>>,
    /// Relabel every sample to one type, collapsing the model to its
    /// type-free variant.
    #[arg(long)]
    pub merge_types: bool,
    /// Gaussian components per prior (default from config).
    #[arg(long)]
    pub k: Option<usize>,
    /// Ridge strength for the classifiers.
    #[arg(long)]
    pub l2: Option<f64>,
    /// Prior label filter: successes-only or all.
    #[arg(long)]
    pub prior_filter: Option<String>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

pub fn run(ctx: &mut Context, args: TrainArgs) -> Result<(), CliError> {
    ctx.record_input(&args.dataset);
    let mut dataset = read_dataset_jsonl(&args.dataset)?;

    if let Some(types) = &args.types {
        let keep: Vec<_> = dataset
            .samples()
            .iter()
            .filter(|s| types.contains(&s.grasp_type.name))
            .cloned()
            .collect();
        if keep.is_empty() {
            return Err(CliError::data(format!(
                "no samples match types {types:?}"
            )));
        }
        dataset = GraspDataset::new(keep)?;
    }
    if args.merge_types {
        dataset = dataset.relabeled_single_type("all");
    }

    let mut config = ctx.config.model.clone();
    if let Some(k) = args.k {
        config.gmm_components = k;
    }
    if let Some(l2) = args.l2 {
        config.l2_strength = l2;
    }
    if let Some(restarts) = args.restarts {
        config.em_restarts = restarts;
    }
    if let Some(filter) = &args.prior_filter {
        config.prior_label_filter = match filter.as_str() {
            "successes-only" => PriorLabelFilter::SuccessesOnly,
            "all" => PriorLabelFilter::All,
            other => {
                return Err(CliError::data(format!(
                    "unknown prior filter {other:?} (use successes-only or all)"
                )))
            }
        };
    }
    ctx.config.model = config.clone();

    let (model, report) = fit_model(&dataset, &config)?;
    for tr in &report.per_type {
        ctx.info(format!(
            "type {:12} classifier: objective {:+.4} sweeps {:5} grad {:.2e} converged {} | prior: log-likelihood {:+.4} iterations {}",
            tr.grasp_type.name,
            tr.classifier.objective,
            tr.classifier.sweeps,
            tr.classifier.final_gradient_norm,
            tr.classifier.converged,
            tr.prior.log_likelihood,
            tr.prior.iterations,
        ));
    }

    let out = ctx.out_path(&args.out);
    write_model_json(&out, &model)?;
    ctx.record_output(&out);
    ctx.info(format!(
        "trained {} types on {} samples -> {}",
        model.num_types(),
        dataset.len(),
        out.display()
    ));
    Ok(())
}
