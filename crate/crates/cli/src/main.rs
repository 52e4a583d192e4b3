//! `dilemma`: command-line front end for data generation, model fitting,
//! evaluation, learning curves, residual analysis and the refinement loop.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dilemma::choicemodel::{self, ChoiceModelSpec, FitConfig, ModelType};
use dilemma::datagen::{self, DesignConfig, TeacherSpec};
use dilemma::features::{self, PrincipleSpec};
use dilemma::harness::{self, CmSpecFile, CurveMetric, FittedModel, HarnessConfig, LoopConfig, Manifest, ModelEntry};
use dilemma::ingest::{self, SplitConfig};
use dilemma::neuralnet::{self, InputEncoder, MlpArch, TrainConfig};
use dilemma::{metrics, residuals, Error, Result};

#[derive(Parser)]
#[command(name = "dilemma", version, about = "Choice models and networks on moral-dilemma responses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate responses from a design and a teacher.
    Generate {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        teacher: PathBuf,
        #[arg(long)]
        n: usize,
        /// Overrides the design file's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a choice model.
    Fit {
        #[arg(long)]
        model: String,
        /// Extra principles (DSL); required for `custom`.
        #[arg(long)]
        principles: Option<PathBuf>,
        #[arg(long)]
        train: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a feedforward network.
    FitNn {
        #[arg(long, default_value = "32,32,32")]
        arch: String,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        /// Principles appended to the input as per-side indicators.
        #[arg(long)]
        principles: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score saved models on a test set.
    Eval {
        #[arg(long, num_args = 1.., required = true)]
        model: Vec<PathBuf>,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learning curves over dataset sizes.
    Curve {
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated sizes; defaults to 100 .. 300000.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', default_value = "equal,animals,utilitarian,expanded,nn")]
        models: Vec<String>,
        #[arg(long, default_value_t = 5)]
        replicates: usize,
        #[arg(long, default_value = "32,32,32")]
        arch: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank and cluster per-dilemma residual gaps between two fitted models.
    Residuals {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        cm: PathBuf,
        #[arg(long)]
        nn: PathBuf,
        #[arg(long, default_value_t = residuals::DEFAULT_MIN_RESPONSES)]
        min_responses: usize,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// One iteration of the residual-driven refinement loop.
    Loop {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        cm_spec: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, default_value_t = 0.002)]
        min_gain: f64,
        #[arg(long, default_value = "32,32,32")]
        arch: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        iteration: usize,
        #[arg(long, default_value_t = residuals::DEFAULT_MIN_RESPONSES)]
        min_responses: usize,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        augment_nn: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_principles(path: &Path) -> Result<Vec<PrincipleSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    features::parse_principles(&text)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Manifest path for single-file outputs: `<out>.manifest.json`.
fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn harness_config(seed: u64, epochs: Option<usize>) -> HarnessConfig {
    HarnessConfig {
        seed,
        nn_epochs: epochs,
        ..HarnessConfig::default()
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate {
            design,
            teacher,
            n,
            seed,
            out,
        } => {
            let mut cfg = DesignConfig::from_file(&design)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let t = TeacherSpec::from_path(&teacher)?;
            let data = datagen::generate_dataset(&cfg, &t, n)?;
            ingest::write_csv(&data, &out)?;
            Manifest::new("generate")
                .seed("design", cfg.seed)
                .param("n", n)
                .config_hash("design+teacher", datagen::config_hash(&cfg, &t, n))
                .input(&design)?
                .input(&teacher)?
                .write_to(&sidecar(&out))
        }

        Command::Fit {
            model,
            principles,
            train,
            seed,
            out,
        } => {
            let t = ModelType::parse(&model).ok_or_else(|| Error::validation(format!("unknown model `{model}`")))?;
            let extra = principles.as_deref().map(read_principles).transpose()?.unwrap_or_default();
            if t == ModelType::Custom && extra.is_empty() {
                return Err(Error::validation("custom models need --principles"));
            }
            let spec = ChoiceModelSpec::preset(t).with_principles(extra)?;
            let data = ingest::read_csv(&train)?;
            let params = choicemodel::fit(&spec, &data, &FitConfig { seed, ..FitConfig::default() })?;
            params.save(&out)?;
            let mut m = Manifest::new("fit").seed("fit", seed).param("model", &model).input(&train)?;
            if let Some(p) = &principles {
                m = m.input(p)?;
            }
            m.write_to(&sidecar(&out))
        }

        Command::FitNn {
            arch,
            train,
            batch,
            seed,
            epochs,
            principles,
            out,
        } => {
            let arch = MlpArch::parse(&arch)?;
            let extra = principles.as_deref().map(read_principles).transpose()?.unwrap_or_default();
            let data = ingest::read_csv(&train)?;
            let mut tc = TrainConfig::for_dataset_size(data.len(), seed);
            if let Some(b) = batch {
                tc.batch_size = b;
            }
            if let Some(e) = epochs {
                tc.epochs = e;
            }
            let model = neuralnet::train(&arch, &data, InputEncoder::with_extra(extra), &tc)?;
            model.save(&out)?;
            let mut m = Manifest::new("fit-nn")
                .seed("train", seed)
                .param("arch", arch.label())
                .param("batch", tc.batch_size)
                .param("epochs", tc.epochs)
                .input(&train)?;
            if let Some(p) = &principles {
                m = m.input(p)?;
            }
            m.write_to(&sidecar(&out))
        }

        Command::Eval { model, test, out } => {
            let data = ingest::read_csv(&test)?;
            let reports = model
                .iter()
                .map(|p| FittedModel::load(p)?.evaluate(&data))
                .collect::<Result<Vec<_>>>()?;
            write_text(&out, &metrics::reports_to_tsv(&reports))?;
            let mut m = Manifest::new("eval").input(&test)?;
            for p in &model {
                m = m.input(p)?;
            }
            m.write_to(&sidecar(&out))
        }

        Command::Curve {
            data,
            sizes,
            models,
            replicates,
            arch,
            seed,
            epochs,
            out,
        } => {
            let arch = MlpArch::parse(&arch)?;
            let entries = models
                .iter()
                .map(|m| ModelEntry::parse(m, &arch))
                .collect::<Result<Vec<_>>>()?;
            let sizes = sizes.unwrap_or_else(harness::default_curve_sizes);
            let dataset = ingest::read_csv(&data)?;
            let points = harness::run_learning_curve(&dataset, &sizes, &entries, replicates, &harness_config(seed, epochs))?;
            create_dir(&out)?;
            write_text(&out.join("curve.csv"), &harness::curve_to_csv(&points))?;
            for metric in CurveMetric::ALL {
                write_text(
                    &out.join(format!("curve_{}.svg", metric.ident())),
                    &harness::curve_to_svg(&points, metric),
                )?;
            }
            Manifest::new("curve")
                .seed("curve", seed)
                .param("models", models.join(","))
                .param("sizes", sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
                .param("replicates", replicates)
                .param("arch", arch.label())
                .input(&data)?
                .write(&out)
        }

        Command::Residuals {
            data,
            cm,
            nn,
            min_responses,
            top,
            out,
        } => {
            let dataset = ingest::read_csv(&data)?;
            let cm_model = choicemodel::ChoiceModelParams::load(&cm)?;
            let nn_model = neuralnet::NetworkModel::load(&nn)?;
            let records = residuals::attach_predictions(residuals::aggregate(&dataset)?, &cm_model, &nn_model);
            let ranked = residuals::rank_gaps(&records, min_responses)?;
            let clusters = residuals::cluster_by_template(&ranked)?;
            create_dir(&out)?;
            write_text(&out.join("clusters.tsv"), &residuals::clusters_to_tsv(&clusters))?;
            for (i, cluster) in clusters.iter().enumerate() {
                let report = residuals::report_table(cluster, top)?;
                write_text(&out.join(format!("cluster_{:03}.txt", i + 1)), &report.to_text())?;
                write_text(&out.join(format!("cluster_{:03}.tsv", i + 1)), &report.to_tsv())?;
            }
            Manifest::new("residuals")
                .param("min_responses", min_responses)
                .param("top", top)
                .param("clusters", clusters.len())
                .input(&data)?
                .input(&cm)?
                .input(&nn)?
                .write(&out)
        }

        Command::Loop {
            data,
            cm_spec,
            candidates,
            min_gain,
            arch,
            seed,
            iteration,
            min_responses,
            epochs,
            augment_nn,
            out,
        } => {
            let spec = CmSpecFile::load(&cm_spec)?;
            let cands = read_principles(&candidates)?;
            let arch = MlpArch::parse(&arch)?;
            let dataset = ingest::read_csv(&data)?;
            let split_cfg = SplitConfig {
                seed,
                ..SplitConfig::default()
            };
            let (train, test) = ingest::split(&dataset, &split_cfg, 0)?;
            let cfg = LoopConfig {
                iteration_index: iteration,
                min_gain,
                min_responses,
                augment_nn,
                harness: harness_config(seed, epochs),
                ..LoopConfig::default()
            };
            let report = harness::run_loop_iteration(&train, &test, &spec, &arch, &cands, &cfg)?;
            create_dir(&out)?;
            let json = serde_json::to_string_pretty(&report)?;
            write_text(&out.join("report.json"), &(json + "\n"))?;
            Manifest::new("loop")
                .seed("split", seed)
                .param("min_gain", min_gain)
                .param("iteration", iteration)
                .param("arch", arch.label())
                .param("accepted", report.accepted.join(","))
                .input(&data)?
                .input(&cm_spec)?
                .input(&candidates)?
                .write(&out)
        }
    }
}
