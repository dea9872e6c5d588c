use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use lightpath_core::design::to_markdown;
use lightpath_core::grammar::{grammar_text, render_canonical};
use lightpath_core::pddl::{Domain, Problem};
use lightpath_core::validate::validate;
use lightpath_core::{DeploymentPlan, StructuredIntent};
use lightpath::config::{Config, GatewayMode};
use lightpath::data::Resources;
use lightpath::eval::{run_eval, EvalCorpus, EvalMode, BUNDLED_EVAL_RULES};
use lightpath::gateway::{self, GatewayError, MockGateway, Passthrough, Rephraser};
use lightpath::generator::{generate_eval_corpus, mock_rules_toml, DEFAULT_SEED};
use lightpath::manager::SessionManager;
use lightpath::pipeline::{Engine, EngineSettings, Stage1Failure};
use lightpath::session::{Payload, Session, Stage, State};
use lightpath::store::{EventStore, JsonlStore, MemoryStore};
use serde_json::json;
use uuid::Uuid;

const OK: u8 = 0;
const GRAMMAR: u8 = 2;
const INFEASIBLE: u8 = 3;
const TRANSPORT: u8 = 4;
const CONFIG: u8 = 5;

/// Intent-to-design pipeline for optical networks.
#[derive(Debug, Parser)]
#[command(name = "lightpath", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stage 1 only: rephrase, parse, triage. Prints the structured intent.
    Parse {
        /// Request text file, or `-` for stdin.
        input: String,
        /// Parse the text as written, without the gateway.
        #[arg(long)]
        bypass_llm: bool,
    },
    /// Enrich, check feasibility and plan a structured intent.
    Plan { intent: PathBuf },
    /// Plan and translate a structured intent into a design.
    Design {
        intent: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// The whole pipeline on one request.
    Pipeline {
        text: String,
        #[arg(long)]
        bypass_llm: bool,
        /// Print the session (artifacts and history) as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Stage-1 evaluation over a labelled corpus (the shipped one by default).
    Eval {
        corpus: Option<PathBuf>,
        /// Parse each case's canonical sentence directly.
        #[arg(long, conflicts_with = "live")]
        bypass_llm: bool,
        /// Use the configured HTTP endpoint instead of the mock rules.
        #[arg(long)]
        live: bool,
        /// Mock rule file (defaults to the rules shipped with the corpus).
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Run one stage per POST /sessions/{id}/advance.
        #[arg(long)]
        step: bool,
        /// Session log directory (overrides the config).
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Check a plan against a domain and problem.
    Validate {
        domain: PathBuf,
        problem: PathBuf,
        /// A plan, or the output of `plan`.
        plan: PathBuf,
    },
    /// Print the intent grammar.
    Grammar,
    /// Regenerate the evaluation corpus and its mock rules.
    GenCorpus {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "data/eval")]
        out: PathBuf,
    },
}

/// An error with the exit code it maps to.
struct Failure(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(CONFIG, e.into())
    }
}

fn fail(code: u8, e: impl Into<anyhow::Error>) -> Failure {
    Failure(code, e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn gateway_code(e: &GatewayError) -> u8 {
    if e.is_transport() {
        TRANSPORT
    } else {
        CONFIG
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn read_intent(path: &Path) -> Result<StructuredIntent, Failure> {
    let intent: StructuredIntent = read_json(path)?;
    intent
        .check()
        .map_err(|e| fail(CONFIG, anyhow::anyhow!("{}: {e}", path.display())))?;
    Ok(intent)
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Grammar => {
            print!("{}", grammar_text());
            Ok(OK)
        }
        Command::GenCorpus { seed, out } => gen_corpus(seed, &out),
        Command::Validate { domain, problem, plan } => validate_cmd(&domain, &problem, &plan),
        Command::Parse { input, bypass_llm } => {
            let text = if input == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
                s
            } else {
                std::fs::read_to_string(&input).with_context(|| format!("reading {input}"))?
            };
            let (resources, gateway) = setup(&config, bypass_llm)?;
            let out = lightpath::pipeline::run_stage_one(&*gateway, &resources.parser(), &resources.triage(), text.trim());
            match out.result {
                Ok(intent) => {
                    print_json(&intent);
                    Ok(OK)
                }
                Err(Stage1Failure::Clarify(d)) => {
                    print_json(&json!({
                        "sentence": out.sentence,
                        "error": d.source_error,
                        "route": d.route,
                        "hint": d.hint,
                    }));
                    eprintln!("{}", d.hint);
                    Ok(GRAMMAR)
                }
                Err(Stage1Failure::Gateway(e)) => Err(fail(gateway_code(&e), e)),
            }
        }
        Command::Plan { intent } => {
            let intent = read_intent(&intent)?;
            let session = from_intent(&config, &intent, false)?;
            let a = &session.artifacts;
            print_json(&json!({
                "guidance": a.enriched,
                "feasibility": a.feasibility,
                "problem": a.problem,
                "plan": a.plan,
                "validation": a.validation,
            }));
            Ok(exit_for(&session))
        }
        Command::Design { intent, json } => {
            let intent = read_intent(&intent)?;
            let session = from_intent(&config, &intent, true)?;
            let a = &session.artifacts;
            match (json, &a.design, &a.degraded) {
                (true, Some(d), _) => print_json(d),
                (true, None, Some(d)) => print_json(d),
                _ => report(&session, json),
            }
            Ok(exit_for(&session))
        }
        Command::Pipeline { text, bypass_llm, json } => {
            let (resources, gateway) = setup(&config, bypass_llm)?;
            let engine = Engine::new(Arc::new(resources), gateway, auto(&config));
            let mut session = Session::new(Uuid::new_v4(), &text);
            engine.submit(&mut session).map_err(|e| fail(CONFIG, e))?;
            report(&session, json);
            Ok(exit_for(&session))
        }
        Command::Eval {
            corpus,
            bypass_llm,
            live,
            rules,
            json,
        } => {
            let corpus = match corpus {
                Some(path) => EvalCorpus::load(&path)?,
                None => EvalCorpus::bundled(),
            };
            let resources = Resources::from_config(&config)?;
            let gateway: Option<Box<dyn Rephraser>> = if bypass_llm {
                None
            } else if live {
                let mut g = config.gateway.clone();
                g.mode = GatewayMode::Http;
                Some(gateway::from_config(&g, &resources.prompts)?)
            } else {
                let source = match rules {
                    Some(p) => std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?,
                    None => BUNDLED_EVAL_RULES.to_owned(),
                };
                Some(Box::new(MockGateway::from_toml(&source)?))
            };
            let mode = if bypass_llm { EvalMode::Bypass } else { EvalMode::Gateway };
            let report = run_eval(&corpus, mode, &resources.parser(), &resources.triage(), gateway.as_deref())
                .map_err(|e| match &e {
                    lightpath::eval::EvalError::Gateway { source, .. } => Failure(gateway_code(source), e.into()),
                    _ => fail(CONFIG, e),
                })?;
            if json {
                print_json(&report);
            } else {
                print!("{}", report.metrics.to_table());
                for c in report.failures() {
                    println!(
                        "miss {}: expected {:?}, observed {:?}, sentence {:?}",
                        c.id, c.expected, c.observed, c.sentence
                    );
                }
            }
            Ok(OK)
        }
        Command::Serve { port, host, step, store } => serve(&config, &host, port, step, store),
    }
}

fn auto(config: &Config) -> EngineSettings {
    EngineSettings {
        auto_advance: true,
        ..EngineSettings::from(config)
    }
}

fn setup(config: &Config, bypass: bool) -> Result<(Resources, Arc<dyn Rephraser>), Failure> {
    let resources = Resources::from_config(config)?;
    let gateway: Arc<dyn Rephraser> = if bypass {
        Arc::new(Passthrough)
    } else {
        Arc::from(gateway::from_config(&config.gateway, &resources.prompts)?)
    };
    Ok((resources, gateway))
}

/// Runs the intent's canonical sentence through the pipeline, stopping
/// before translation unless `translate` is set.
fn from_intent(config: &Config, intent: &StructuredIntent, translate: bool) -> Result<Session, Failure> {
    let (resources, gateway) = setup(config, true)?;
    let settings = EngineSettings {
        auto_advance: false,
        ..EngineSettings::from(config)
    };
    let engine = Engine::new(Arc::new(resources), gateway, settings);
    let mut s = Session::new(Uuid::new_v4(), render_canonical(intent).as_str());
    engine.submit(&mut s).map_err(|e| fail(CONFIG, e))?;
    while !s.state.is_resting() && (translate || s.state != State::PlanReady) {
        engine.advance(&mut s).map_err(|e| fail(CONFIG, e))?;
    }
    Ok(s)
}

fn exit_for(s: &Session) -> u8 {
    match s.state {
        State::AwaitingClarification => GRAMMAR,
        State::Degraded => INFEASIBLE,
        State::Failed => match s.history.last().map(|e| &e.payload) {
            Some(Payload::Failed { transport: true, .. }) => TRANSPORT,
            Some(Payload::Failed {
                stage: Stage::Rephrase, ..
            }) => CONFIG,
            _ => INFEASIBLE,
        },
        _ => OK,
    }
}

fn report(s: &Session, json: bool) {
    if json {
        print_json(&lightpath::service::SessionView::from(s));
        return;
    }
    let a = &s.artifacts;
    match s.state {
        State::DesignReady => print!("{}", to_markdown(a.design.as_ref().expect("design ready"))),
        State::Degraded => print!("{}", a.degraded.as_ref().expect("degraded design").to_markdown()),
        State::AwaitingClarification => {
            let d = s.pending.as_ref().expect("pending clarification");
            println!("{}", d.hint);
            eprintln!(
                "{} at token {:?} (position {})",
                d.source_error.kind.as_str(),
                d.source_error.offending_token,
                d.source_error.position
            );
        }
        State::Failed => {
            if let Some(Payload::Failed { stage, cause, .. }) = s.history.last().map(|e| &e.payload) {
                eprintln!("{stage:?} failed: {cause}");
            }
        }
        other => println!("stopped in {other:?}"),
    }
}

fn validate_cmd(domain: &Path, problem: &Path, plan: &Path) -> Result<u8, Failure> {
    let read = |p: &Path| std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    let domain = Domain::parse(&read(domain)?).map_err(|e| fail(CONFIG, anyhow::anyhow!("domain: {e}")))?;
    let problem = Problem::parse(&read(problem)?).map_err(|e| fail(CONFIG, anyhow::anyhow!("problem: {e}")))?;
    let value: serde_json::Value = read_json(plan)?;
    let plan_value = match value.get("plan") {
        Some(inner) if value.get("steps").is_none() => inner.clone(),
        _ => value,
    };
    let plan: DeploymentPlan = serde_json::from_value(plan_value).context("plan JSON")?;
    let report = validate(&domain, &problem, &plan);
    print_json(&report);
    Ok(if report.valid { OK } else { INFEASIBLE })
}

fn gen_corpus(seed: u64, out: &Path) -> Result<u8, Failure> {
    let r = Resources::bundled();
    let cities: Vec<String> = r.registry.iter().map(|(c, _)| c.to_owned()).collect();
    let generated = generate_eval_corpus(seed, &r.standards, &cities);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    std::fs::write(out.join("corpus.json"), generated.corpus.to_json())?;
    std::fs::write(
        out.join("mock_rules.toml"),
        mock_rules_toml(&generated.mock_rules, generated.planted.len()),
    )?;
    println!(
        "wrote {} cases and {} rules to {}",
        generated.corpus.cases.len(),
        generated.mock_rules.len(),
        out.display()
    );
    Ok(OK)
}

fn serve(config: &Config, host: &str, port: u16, step: bool, store: Option<PathBuf>) -> Result<u8, Failure> {
    let (resources, gateway) = setup(config, false)?;
    let settings = EngineSettings {
        auto_advance: !step && config.pipeline.auto_advance,
        ..EngineSettings::from(config)
    };
    let engine = Arc::new(Engine::new(Arc::new(resources), gateway, settings));
    let store: Box<dyn EventStore> = match store.or_else(|| config.store.dir.clone()) {
        Some(dir) => Box::new(JsonlStore::open(dir)?),
        None => Box::new(MemoryStore),
    };
    let manager = Arc::new(SessionManager::new(engine, store)?);
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("binding {host}:{port}"))?;
        eprintln!(
            "listening on http://{} ({} sessions loaded, gateway {})",
            listener.local_addr()?,
            manager.len(),
            manager.engine().gateway().describe()
        );
        lightpath::service::serve(listener, manager).await?;
        Ok(OK)
    })
}
