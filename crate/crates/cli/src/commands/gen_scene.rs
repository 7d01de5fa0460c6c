use std::path::PathBuf;

use clap::Args;
use grasp_core::io::write_cloud_ply;
use grasp_core::synthetic::{benchmark_objects, generate_scene, SyntheticObjectSpec};

use crate::context::Context;
use crate::errors::CliError;

#[derive(Args)]
pub struct GenSceneArgs {
    /// Scene spec TOML; defaults to a built-in benchmark object.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Index into the built-in object catalog when no spec is given.
    #[arg(long, default_value_t = 0)]
    pub object: usize,
    /// Output PLY file.
    #[arg(long, default_value = "scene.ply")]
    pub out: PathBuf,
}

pub fn run(ctx: &mut Context, args: GenSceneArgs) -> Result<(), CliError> {
    let spec: SyntheticObjectSpec = match &args.spec {
        Some(path) => {
            ctx.record_input(path);
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        }
        None => {
            let mut objects = benchmark_objects(args.object + 1, ctx.seed);
            objects.remove(args.object)
        }
    };
    let cloud = generate_scene(&spec);
    let out = ctx.out_path(&args.out);
    write_cloud_ply(&out, &cloud)?;
    ctx.record_output(&out);
    ctx.info(format!(
        "generated scene {:?} with {} points -> {}",
        spec.name,
        cloud.len(),
        out.display()
    ));
    Ok(())
}
