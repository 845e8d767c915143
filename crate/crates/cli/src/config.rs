//! Effective run configuration: defaults, then the config file, then flags.
//!
//! All three layers are merged as TOML tables. The file is checked against
//! the defaults table first so that a misspelt key or a value of the wrong
//! type is reported by name instead of being silently ignored.

use std::fmt;
use std::path::Path;

use adainject::landscape::LandscapeId;
use adainject::regret::{self, SequenceKind};
use adainject::toy::{self, ToyLoss};
use adainject::{mlp, OptimizerConfig, OptimizerKind};
use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::args::{Cli, Command, DataFlags, OptimizerFlags};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}` expects {expected}, found {found}")]
    TypeMismatch {
        key: String,
        expected: String,
        found: String,
    },
    #[error("no subcommand given on the command line or as `command` in the config file")]
    MissingSubcommand,
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Toy,
    Regret,
    Train,
    SweepK,
    Gradcheck,
    OracleCheck,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Toy => "toy",
            CommandKind::Regret => "regret",
            CommandKind::Train => "train",
            CommandKind::SweepK => "sweep-k",
            CommandKind::Gradcheck => "gradcheck",
            CommandKind::OracleCheck => "oracle-check",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            CommandKind::Toy,
            CommandKind::Regret,
            CommandKind::Train,
            CommandKind::SweepK,
            CommandKind::Gradcheck,
            CommandKind::OracleCheck,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySection {
    pub landscapes: Vec<LandscapeId>,
    pub x0: f64,
    pub iterations: usize,
    pub loss: ToyLoss,
    pub compare: bool,
    pub calibrate: bool,
    pub alphas: Vec<f64>,
    pub margin: f64,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegretSection {
    pub dim: usize,
    pub horizons: Vec<usize>,
    pub sequence: SequenceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub n: usize,
    pub d: usize,
    pub data_seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub decay_after: f64,
    pub decay_factor: f64,
    pub k_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub samples: usize,
    pub fd_step: f64,
    pub mlp_fd_step: f64,
    pub steps: usize,
    pub dim: usize,
}

/// Everything that determines a run's outputs. The output directory is
/// deliberately not part of it, so moving the output root keeps run ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub optimizers: Vec<OptimizerKind>,
    pub seeds: Vec<u64>,
    pub emit_plotscript: bool,
    pub optimizer: OptimizerConfig,
    pub toy: ToySection,
    pub regret: RegretSection,
    pub train: TrainSection,
    pub check: CheckSection,
}

impl RunConfig {
    pub fn defaults(command: CommandKind) -> Self {
        let optimizers = match command {
            CommandKind::Toy => vec![OptimizerKind::Adam, OptimizerKind::AdamInject],
            CommandKind::SweepK => OptimizerKind::INJECTED.to_vec(),
            _ => OptimizerKind::ALL.to_vec(),
        };
        let seeds = match command {
            CommandKind::Regret => regret::DEFAULT_SEEDS.to_vec(),
            CommandKind::Train | CommandKind::SweepK => vec![1, 2, 3],
            _ => vec![1],
        };
        let optimizer = match command {
            CommandKind::Toy => OptimizerConfig::default().with_alpha(toy::TOY_DEFAULT_ALPHA),
            CommandKind::Regret => regret::default_config(),
            _ => OptimizerConfig::default(),
        };
        let ts = mlp::TrainSettings::default();
        Self {
            command,
            optimizers,
            seeds,
            emit_plotscript: false,
            optimizer,
            toy: ToySection {
                landscapes: vec![LandscapeId::F1, LandscapeId::F2, LandscapeId::F3],
                x0: toy::DEFAULT_X0,
                iterations: toy::DEFAULT_ITERATIONS,
                loss: ToyLoss::Direct,
                compare: false,
                calibrate: false,
                alphas: toy::CALIBRATION_GRID.to_vec(),
                margin: toy::DEFAULT_MARGIN,
                window: toy::DEFAULT_WINDOW,
            },
            regret: RegretSection {
                dim: regret::DEFAULT_DIM,
                horizons: regret::DEFAULT_HORIZONS.to_vec(),
                sequence: SequenceKind::Quadratic,
            },
            train: TrainSection {
                n: mlp::DEFAULT_N,
                d: mlp::DEFAULT_D,
                data_seed: 1,
                epochs: ts.epochs,
                batch_size: ts.batch_size,
                hidden: ts.hidden,
                decay_after: ts.decay_after,
                decay_factor: ts.decay_factor,
                k_values: mlp::DEFAULT_K_VALUES.to_vec(),
            },
            check: CheckSection {
                samples: 1000,
                fd_step: adainject::landscape::FD_STEP,
                mlp_fd_step: 1e-5,
                steps: 1000,
                dim: 5,
            },
        }
    }

    /// Canonical TOML text: fixed field order, shortest round-trip floats.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("run config always serialises")
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::canonical`].
    pub fn run_id(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn train_settings(&self, seed: u64) -> mlp::TrainSettings {
        mlp::TrainSettings {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            hidden: self.train.hidden,
            seed,
            decay_after: self.train.decay_after,
            decay_factor: self.train.decay_factor,
        }
    }

    /// Range checks that serde cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, message: String| {
            Err(ConfigError::Invalid {
                key: key.to_string(),
                message,
            })
        };
        if let Err(e) = self.optimizer.validate() {
            return bad("optimizer", e.to_string());
        }
        if self.optimizers.is_empty() {
            return bad("optimizers", "at least one optimizer is required".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds", "at least one seed is required".into());
        }
        let t = &self.toy;
        if t.landscapes.is_empty() {
            return bad("toy.landscapes", "at least one landscape is required".into());
        }
        let spec = toy::ToyRunSpec {
            landscape: t.landscapes[0],
            kind: self.optimizers[0],
            config: self.optimizer,
            x0: t.x0,
            iterations: t.iterations,
            loss: t.loss,
        };
        if let Err(e) = spec.validate() {
            return bad("toy", e.to_string());
        }
        if !(t.margin >= 0.0 && t.margin.is_finite()) {
            return bad("toy.margin", "must be finite and >= 0".into());
        }
        if t.compare && (t.window == 0 || t.window > t.iterations) {
            return bad("toy.window", format!("must lie in 1..={}", t.iterations));
        }
        if t.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return bad("toy.alphas", "must be finite and >= 0".into());
        }
        let r = &self.regret;
        if r.dim == 0 {
            return bad("regret.dim", "must be >= 1".into());
        }
        if r.horizons.is_empty() || r.horizons[0] == 0 || r.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return bad("regret.horizons", "must be non-empty, positive and strictly increasing".into());
        }
        let tr = &self.train;
        if tr.n < 100 || tr.d < 2 {
            return bad("train", "need n >= 100 and d >= 2".into());
        }
        if tr.epochs == 0 || tr.hidden == 0 || tr.batch_size == 0 || tr.batch_size > tr.n {
            return bad("train", format!("need epochs, hidden >= 1 and 1 <= batch_size <= {}", tr.n));
        }
        if !(0.0..=1.0).contains(&tr.decay_after) || !(tr.decay_factor >= 0.0) {
            return bad("train", "decay_after must lie in [0, 1] and decay_factor be >= 0".into());
        }
        if tr.k_values.is_empty() || tr.k_values.iter().any(|k| !(k.is_finite() && *k >= 1.0)) {
            return bad("train.k_values", "need at least one k, each >= 1".into());
        }
        let c = &self.check;
        if c.samples == 0 || c.steps == 0 || c.dim == 0 || [c.fd_step, c.mlp_fd_step].iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return bad("check", "samples, steps, dim and fd_step must be positive".into());
        }
        Ok(())
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "a string",
        Value::Integer(_) => "an integer",
        Value::Float(_) => "a float",
        Value::Boolean(_) => "a boolean",
        Value::Datetime(_) => "a datetime",
        Value::Array(_) => "an array",
        Value::Table(_) => "a table",
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Compares `file` against the shape of `reference`, widening integers to
/// floats where a float is expected.
fn check_shape(reference: &Table, file: &mut Table, prefix: &str) -> Result<(), ConfigError> {
    for (key, value) in file.iter_mut() {
        let path = join(prefix, key);
        let Some(expected) = reference.get(key) else {
            return Err(ConfigError::UnknownKey(path));
        };
        check_value(expected, value, &path)?;
    }
    Ok(())
}

fn check_value(expected: &Value, value: &mut Value, path: &str) -> Result<(), ConfigError> {
    let mismatch = |value: &Value| ConfigError::TypeMismatch {
        key: path.to_string(),
        expected: type_name(expected).to_string(),
        found: type_name(value).to_string(),
    };
    match (expected, &mut *value) {
        (Value::Table(r), Value::Table(f)) => check_shape(r, f, path),
        (Value::Float(_), Value::Integer(i)) => {
            *value = Value::Float(*i as f64);
            Ok(())
        }
        (Value::Array(r), Value::Array(items)) => {
            if let Some(proto) = r.first() {
                for (i, item) in items.iter_mut().enumerate() {
                    check_value(proto, item, &format!("{path}[{i}]"))?;
                }
            }
            Ok(())
        }
        (e, v) if std::mem::discriminant(e) == std::mem::discriminant(v) => Ok(()),
        (_, v) => Err(mismatch(v)),
    }
}

/// Deep merge; tables merge key by key, anything else is replaced.
fn merge(base: &mut Table, top: &Table) {
    for (k, v) in top {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn lookup<'a>(table: &'a Table, path: &str) -> Option<&'a Value> {
    let mut parts = path.split('.');
    let mut cur = table.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

fn flatten(table: &Table, prefix: &str, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let path = join(prefix, k);
        match v {
            Value::Table(t) => flatten(t, &path, out),
            _ => out.push((path, v.clone())),
        }
    }
}

/// Flag values as a TOML table with the same layout as [`RunConfig`].
#[derive(Default)]
struct Overrides(Table);

impl Overrides {
    fn set<T: Serialize>(&mut self, path: &str, value: Option<T>) {
        let Some(value) = value else { return };
        let value = Value::try_from(value).expect("flag values serialise");
        let mut parts: Vec<&str> = path.split('.').collect();
        let last = parts.pop().unwrap();
        let mut cur = &mut self.0;
        for p in parts {
            cur = cur
                .entry(p.to_string())
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .unwrap();
        }
        cur.insert(last.to_string(), value);
    }

    fn flag(&mut self, path: &str, on: bool) {
        if on {
            self.set(path, Some(true));
        }
    }

    fn optimizer(&mut self, o: &OptimizerFlags) {
        self.set("optimizers", o.optimizers.clone());
        self.set("optimizer.alpha", o.alpha);
        self.set("optimizer.beta1", o.beta1);
        self.set("optimizer.beta2", o.beta2);
        self.set("optimizer.epsilon", o.epsilon);
        self.set("optimizer.k", o.k);
        self.set("optimizer.lambda", o.lambda);
        self.set("seeds", o.seeds.clone());
        self.flag("emit_plotscript", o.plot);
    }

    fn data(&mut self, d: &DataFlags) {
        self.set("train.epochs", d.epochs);
        self.set("train.batch_size", d.batch_size);
        self.set("train.hidden", d.hidden);
        self.set("train.n", d.n);
        self.set("train.d", d.d);
        self.set("train.data_seed", d.data_seed);
    }
}

fn parse_choice<T: Serialize + Copy>(key: &str, raw: &Option<String>, choices: &[T]) -> Result<Option<T>, ConfigError> {
    let Some(raw) = raw else { return Ok(None) };
    let name = |c: &T| Value::try_from(*c).ok().and_then(|v| v.as_str().map(str::to_string));
    choices
        .iter()
        .find(|c| name(c).as_deref() == Some(raw.trim()))
        .copied()
        .map(Some)
        .ok_or_else(|| ConfigError::Invalid {
            key: key.to_string(),
            message: format!(
                "`{raw}` is not one of {}",
                choices.iter().filter_map(name).collect::<Vec<_>>().join(", ")
            ),
        })
}

fn overrides(cmd: &Command) -> Result<Overrides, ConfigError> {
    let mut o = Overrides::default();
    match cmd {
        Command::Toy(a) => {
            o.optimizer(&a.opt);
            o.set("toy.landscapes", a.landscapes.clone());
            o.set("toy.iterations", a.iterations);
            o.set("toy.x0", a.x0);
            o.set(
                "toy.loss",
                parse_choice("toy.loss", &a.loss, &[ToyLoss::Direct, ToyLoss::Squared])?,
            );
            o.flag("toy.compare", a.compare);
            o.flag("toy.calibrate", a.calibrate);
            o.set("toy.alphas", a.alphas.clone());
            o.set("toy.margin", a.margin);
            o.set("toy.window", a.window);
        }
        Command::Regret(a) => {
            o.optimizer(&a.opt);
            o.set("regret.dim", a.dim);
            o.set("regret.horizons", a.horizons.clone());
            o.set(
                "regret.sequence",
                parse_choice(
                    "regret.sequence",
                    &a.sequence,
                    &[SequenceKind::Quadratic, SequenceKind::Linear],
                )?,
            );
        }
        Command::Train(a) => {
            o.optimizer(&a.opt);
            o.data(&a.data);
        }
        Command::SweepK(a) => {
            o.optimizer(&a.opt);
            o.data(&a.data);
            o.set("train.k_values", a.k_values.clone());
        }
        Command::Gradcheck(a) => {
            o.optimizer(&a.opt);
            o.set("check.samples", a.samples);
            o.set("check.fd_step", a.fd_step);
            o.set("check.mlp_fd_step", a.mlp_fd_step);
        }
        Command::OracleCheck(a) => {
            o.optimizer(&a.opt);
            o.set("check.steps", a.steps);
            o.set("check.dim", a.dim);
        }
    }
    Ok(o)
}

fn command_kind(cmd: &Command) -> CommandKind {
    CommandKind::parse(cmd.name()).expect("every subcommand has a kind")
}

pub fn read_file(path: &Path) -> Result<Table, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    text.parse::<Table>().map_err(|e| ConfigError::Parse {
        path: path.display().to_string(),
        message: e.message().to_string(),
    })
}

/// Builds the effective configuration from parsed arguments and an optional
/// config file table.
pub fn resolve(cli: &Cli, file: Option<Table>) -> Result<RunConfig, ConfigError> {
    let mut file = file.unwrap_or_default();
    let file_command = match file.get("command") {
        None => None,
        Some(Value::String(s)) => Some(CommandKind::parse(s).ok_or_else(|| ConfigError::Invalid {
            key: "command".into(),
            message: format!("unknown subcommand `{s}`"),
        })?),
        Some(v) => {
            return Err(ConfigError::TypeMismatch {
                key: "command".into(),
                expected: "a string".into(),
                found: type_name(v).into(),
            })
        }
    };
    let command = match (&cli.command, file_command) {
        (Some(c), Some(f)) => {
            let c = command_kind(c);
            if c != f {
                info!("command: command-line `{c}` overrides config file `{f}`");
            }
            c
        }
        (Some(c), None) => command_kind(c),
        (None, Some(f)) => f,
        (None, None) => return Err(ConfigError::MissingSubcommand),
    };
    file.insert("command".into(), Value::String(command.name().into()));

    let Value::Table(mut merged) = Value::try_from(RunConfig::defaults(command)).expect("defaults serialise")
    else {
        unreachable!("structs serialise to tables")
    };
    check_shape(&merged, &mut file, "")?;
    merge(&mut merged, &file);

    if let Some(cmd) = &cli.command {
        let flags = overrides(cmd)?.0;
        let mut pairs = Vec::new();
        flatten(&flags, "", &mut pairs);
        for (path, value) in &pairs {
            if let Some(old) = lookup(&file, path) {
                if old != value {
                    info!("{path}: command-line value {value} overrides config file value {old}");
                }
            }
        }
        merge(&mut merged, &flags);
    }

    let cfg: RunConfig = Value::Table(merged).try_into().map_err(|e: toml::de::Error| ConfigError::Invalid {
        key: "config".into(),
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// [`resolve`] with the file named by `--config`, if any.
pub fn parse_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let file = cli.config.as_deref().map(read_file).transpose()?;
    resolve(cli, file)
}
