use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bunsetsu::corpus::{write_corpus, BoundaryRule, SyntheticConfig};
use bunsetsu::learners::{decision_list, MaxEntParams, TreeParams};
use bunsetsu::patterns::{template_listing, templates};
use bunsetsu::{parse_corpus, run_experiment, score, Corpus, Learner, MethodKind, TrainParams};

/// Bunsetsu boundary classifiers: train, predict, evaluate and compare.
#[derive(Parser)]
#[command(name = "bunsetsu", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a labeled corpus.
    Train {
        #[arg(long)]
        method: MethodKind,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Insert predicted `*` boundary lines into a corpus.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score a model against a labeled corpus.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Train on one corpus and score every method on both corpora.
    Compare {
        #[arg(long)]
        learn: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// `all` or a comma-separated list of method names.
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Write a synthetic labeled corpus.
    GenSynthetic {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        sentences: u32,
        #[arg(long, default_value_t = 4)]
        min_len: u32,
        #[arg(long, default_value_t = 16)]
        max_len: u32,
        #[arg(long, default_value_t = 6)]
        n_major: u32,
        #[arg(long, default_value_t = 4)]
        n_minor: u32,
        #[arg(long, default_value_t = 20)]
        n_semantic: u32,
        #[arg(long, default_value_t = 200)]
        n_words: u32,
        #[arg(long, default_value_t = 0.5)]
        semantic_rate: f64,
        #[arg(long, value_enum, default_value_t = RuleArg::PosTable)]
        rule: RuleArg,
        #[arg(long, default_value_t = 0.4)]
        partition_rate: f64,
        /// Label noise; 0 gives a conflict-free corpus.
        #[arg(long, default_value_t = 0.0)]
        flip_rate: f64,
    },
    /// Print the decision list of a rule-family model.
    Rules {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Print the pattern template table.
    Templates,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 1)]
    maxent_cutoff: u32,
    #[arg(long, default_value_t = 200)]
    maxent_iterations: u32,
    #[arg(long, default_value_t = 1e-4)]
    maxent_tolerance: f64,
    /// Values seen fewer times are pooled before tree induction.
    #[arg(long, default_value_t = 10)]
    tree_threshold: u32,
    /// Skip pessimistic pruning of the decision tree.
    #[arg(long)]
    tree_no_prune: bool,
}

impl ParamArgs {
    fn to_params(&self) -> TrainParams {
        TrainParams {
            maxent: MaxEntParams {
                cutoff: self.maxent_cutoff,
                max_iterations: self.maxent_iterations,
                tolerance: self.maxent_tolerance,
            },
            tree: TreeParams {
                rare_threshold: self.tree_threshold,
                prune: !self.tree_no_prune,
                ..TreeParams::default()
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Always,
    Never,
    PosTable,
}

fn read_corpus(path: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_corpus(&text).with_context(|| format!("{}", path.display()))
}

fn load_model(path: &Path) -> Result<Learner> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Learner::from_model_str(&text).with_context(|| format!("{}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn parse_methods(list: &str) -> Result<Vec<MethodKind>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(MethodKind::ALL.to_vec());
    }
    let kinds = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<MethodKind>())
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        bail!("no methods given");
    }
    Ok(kinds)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train {
            method,
            corpus,
            output,
            params,
        } => {
            let corpus = read_corpus(&corpus)?;
            let learner = Learner::train(method, &corpus, &params.to_params())?;
            write_output(Some(&output), &learner.to_model_string()?)
        }
        Command::Predict {
            model,
            input,
            output,
        } => {
            let learner = load_model(&model)?;
            let corpus = read_corpus(&input)?;
            let predicted = corpus.relabel(&learner.predict_all(&corpus.instances()))?;
            write_output(output.as_deref(), &write_corpus(&predicted))
        }
        Command::Evaluate { model, corpus } => {
            let learner = load_model(&model)?;
            let corpus = read_corpus(&corpus)?;
            let instances = corpus.instances();
            let mut report = score(&learner.predict_all(&instances), &corpus.gold())?;
            if matches!(learner.kind, MethodKind::Method1 | MethodKind::Method2) {
                report.exclusive_coverage = learner
                    .rule_table()
                    .map(|t| bunsetsu::exclusive_coverage(t, &instances));
            }
            write_output(None, &format!("method\t{}\n{report}\n", learner.kind))
        }
        Command::Compare {
            learn,
            test,
            methods,
            format,
            params,
        } => {
            let kinds = parse_methods(&methods)?;
            let (learn, test) = (read_corpus(&learn)?, read_corpus(&test)?);
            let table = run_experiment(&learn, &test, &kinds, &params.to_params())?;
            let text = match format {
                Format::Text => table.to_text(),
                Format::Tsv => table.to_tsv(),
            };
            write_output(None, &text)
        }
        Command::GenSynthetic {
            output,
            seed,
            sentences,
            min_len,
            max_len,
            n_major,
            n_minor,
            n_semantic,
            n_words,
            semantic_rate,
            rule,
            partition_rate,
            flip_rate,
        } => {
            let config = SyntheticConfig {
                n_sentences: sentences,
                min_len,
                max_len,
                n_major,
                n_minor,
                n_semantic,
                n_words,
                semantic_rate,
                rule: match rule {
                    RuleArg::Always => BoundaryRule::Always,
                    RuleArg::Never => BoundaryRule::Never,
                    RuleArg::PosTable => BoundaryRule::PosTable {
                        partition_rate,
                        flip_rate,
                    },
                },
            };
            let corpus = config.generate(seed)?;
            eprintln!("{}", corpus.provenance);
            write_output(output.as_deref(), &write_corpus(&corpus))
        }
        Command::Rules { model, limit } => {
            let learner = load_model(&model)?;
            let Some(table) = learner.rule_table() else {
                bail!(
                    "{}: {} models have no rule table",
                    model.display(),
                    learner.kind
                );
            };
            let mut out = String::from(
                "rank\tprobability\tsupport\tfrequency\tcategory\ttemplate\tpattern\n",
            );
            for (rank, e) in decision_list(table)
                .iter()
                .take(limit.unwrap_or(usize::MAX))
                .enumerate()
            {
                out.push_str(&format!(
                    "{}\t{:.4}\t{}\t{}\t{}\t{}\t{}\n",
                    rank + 1,
                    e.probability(),
                    e.support,
                    e.frequency,
                    if e.category {
                        "partition"
                    } else {
                        "non-partition"
                    },
                    templates()[e.key.template_id].label(),
                    e.key
                ));
            }
            write_output(None, &out)
        }
        Command::Templates => write_output(None, &template_listing()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
