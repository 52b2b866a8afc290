//! Scenario configuration: a small key-value file with nested sections,
//! parsed with line/field diagnostics, plus the canonical dump used by
//! `--dump-config` (dump and parse round-trip exactly).

use std::fmt;

/// Channel family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    /// Attenuated Ornstein-Uhlenbeck scattering with decay d (or explicit
    /// (a, b) for time-domain sampling).
    Ou,
    /// Uncorrelated scattering: constant spectral variance.
    Uncorrelated,
}

/// Monte Carlo section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    /// Number of realizations.
    pub n: usize,
    /// Base RNG seed; realization i uses stream (seed, i).
    pub seed: u64,
    /// Time-grid size.
    pub m: usize,
    /// Horizon factor: T = t_factor / b.
    pub t_factor: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n: 100_000,
            seed: 42,
            m: 1024,
            t_factor: 20.0,
        }
    }
}

/// Full scenario description for the sweep and validation commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ChannelKind,
    /// OU decay parameters, one column per entry.
    pub ds: Vec<f64>,
    /// Optional explicit (correlation, power) decay pair; when set it must
    /// be consistent with the single configured d = a + b.
    pub ab: Option<(f64, f64)>,
    pub w: f64,
    pub rho_grid: Vec<f64>,
    pub grid_size: usize,
    pub mc: Option<McConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kind: ChannelKind::Ou,
            ds: vec![1.0, 5.0],
            ab: None,
            w: 1.0,
            rho_grid: log_range(1e-2, 1e3, 25),
            grid_size: 4096,
            mc: Some(McConfig::default()),
        }
    }
}

/// Configuration error with the offending line and field when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " (field `{field}`)")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        field: field.map(str::to_string),
        message: message.into(),
    }
}

/// Log-spaced grid, endpoints included.
pub fn log_range(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (la, lb) = (lo.log10(), hi.log10());
    (0..points)
        .map(|i| 10f64.powf(la + (lb - la) * i as f64 / (points - 1) as f64))
        .collect()
}

/// Parse an SNR grid description: either `min:max:points` (log-spaced) or a
/// comma-separated list.
pub fn parse_rho_spec(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(err(None, Some("rho"), format!("expected min:max:points, got `{spec}`")));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| err(None, Some("rho"), format!("bad range minimum `{}`", parts[0])))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| err(None, Some("rho"), format!("bad range maximum `{}`", parts[1])))?;
        let points: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| err(None, Some("rho"), format!("bad point count `{}`", parts[2])))?;
        if !(lo > 0.0 && hi > lo) || points < 2 {
            return Err(err(
                None,
                Some("rho"),
                "log range needs 0 < min < max and at least 2 points",
            ));
        }
        Ok(log_range(lo, hi, points))
    } else {
        let mut grid = Vec::new();
        for piece in spec.split(',') {
            let v: f64 = piece
                .trim()
                .parse()
                .map_err(|_| err(None, Some("rho"), format!("bad SNR value `{}`", piece.trim())))?;
            if !v.is_finite() || v < 0.0 {
                return Err(err(None, Some("rho"), format!("SNR must be >= 0, got {v}")));
            }
            grid.push(v);
        }
        if grid.is_empty() {
            return Err(err(None, Some("rho"), "empty SNR grid"));
        }
        Ok(grid)
    }
}

/// Parse a comma-separated list of positive decay parameters.
pub fn parse_d_list(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let mut ds = Vec::new();
    for piece in spec.split(',') {
        let v: f64 = piece
            .trim()
            .parse()
            .map_err(|_| err(None, Some("d"), format!("bad decay value `{}`", piece.trim())))?;
        if !v.is_finite() || v <= 0.0 {
            return Err(err(None, Some("d"), format!("decay must be > 0, got {v}")));
        }
        ds.push(v);
    }
    if ds.is_empty() {
        return Err(err(None, Some("d"), "empty decay list"));
    }
    Ok(ds)
}

fn parse_num<T: std::str::FromStr>(
    value: &str,
    line: usize,
    field: &str,
) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| err(Some(line), Some(field), format!("cannot parse `{}`", value.trim())))
}

/// Parse the configuration file format.
pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig {
        mc: None,
        ..ScenarioConfig::default()
    };
    let mut section = String::new();
    let mut mc = McConfig::default();
    let mut saw_mc = false;
    let mut a: Option<f64> = None;
    let mut b: Option<f64> = None;
    let mut saw_d = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(Some(lineno), None, "unterminated section header"))?;
            section = name.trim().to_string();
            match section.as_str() {
                "channel" | "scenario" | "mc" => {}
                other => {
                    return Err(err(Some(lineno), None, format!("unknown section `[{other}]`")))
                }
            }
            if section == "mc" {
                saw_mc = true;
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(Some(lineno), None, format!("expected key = value, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        match (section.as_str(), key) {
            ("channel", "kind") => {
                cfg.kind = match value {
                    "ou" => ChannelKind::Ou,
                    "uncorrelated" => ChannelKind::Uncorrelated,
                    other => {
                        return Err(err(
                            Some(lineno),
                            Some("kind"),
                            format!("expected `ou` or `uncorrelated`, got `{other}`"),
                        ))
                    }
                };
            }
            ("channel", "d") => {
                cfg.ds = parse_d_list(value).map_err(|mut e| {
                    e.line = Some(lineno);
                    e
                })?;
                saw_d = true;
            }
            ("channel", "a") => a = Some(parse_num(value, lineno, "a")?),
            ("channel", "b") => b = Some(parse_num(value, lineno, "b")?),
            ("scenario", "w") => cfg.w = parse_num(value, lineno, "w")?,
            ("scenario", "rho") => {
                cfg.rho_grid = parse_rho_spec(value).map_err(|mut e| {
                    e.line = Some(lineno);
                    e
                })?;
            }
            ("scenario", "grid_size") => cfg.grid_size = parse_num(value, lineno, "grid_size")?,
            ("mc", "n") => mc.n = parse_num(value, lineno, "n")?,
            ("mc", "seed") => mc.seed = parse_num(value, lineno, "seed")?,
            ("mc", "m") => mc.m = parse_num(value, lineno, "m")?,
            ("mc", "t_factor") => mc.t_factor = parse_num(value, lineno, "t_factor")?,
            (sec, key) => {
                return Err(err(
                    Some(lineno),
                    Some(key),
                    format!("unknown key `{key}` in section `[{sec}]`"),
                ))
            }
        }
    }

    match (a, b) {
        (Some(a), Some(b)) => {
            if !a.is_finite() || !b.is_finite() || a < 0.0 || b <= 0.0 {
                return Err(err(None, Some("a"), "need a >= 0 and b > 0"));
            }
            if saw_d && (cfg.ds.len() != 1 || (cfg.ds[0] - (a + b)).abs() > 1e-12 * (a + b)) {
                return Err(err(
                    None,
                    Some("d"),
                    "explicit (a, b) requires d to be absent or the single value a + b",
                ));
            }
            cfg.ds = vec![a + b];
            cfg.ab = Some((a, b));
        }
        (None, None) => {}
        _ => return Err(err(None, Some("a"), "a and b must be given together")),
    }
    if saw_mc {
        cfg.mc = Some(mc);
    }
    validate_config(&cfg)?;
    Ok(cfg)
}

fn validate_config(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    if !cfg.w.is_finite() || cfg.w <= 0.0 {
        return Err(err(None, Some("w"), format!("bandwidth must be > 0, got {}", cfg.w)));
    }
    if cfg.rho_grid.is_empty() {
        return Err(err(None, Some("rho"), "SNR grid must not be empty"));
    }
    if cfg.grid_size < 2 {
        return Err(err(None, Some("grid_size"), "grid size must be at least 2"));
    }
    if cfg.kind == ChannelKind::Ou && cfg.ds.is_empty() {
        return Err(err(None, Some("d"), "OU channel needs at least one decay value"));
    }
    if let Some(mc) = &cfg.mc {
        if mc.n < 2 {
            return Err(err(None, Some("n"), "need at least 2 realizations"));
        }
        if mc.m < 256 {
            return Err(err(None, Some("m"), "time grid needs at least 256 points"));
        }
        if !mc.t_factor.is_finite() || mc.t_factor < 20.0 {
            return Err(err(None, Some("t_factor"), "horizon factor must be at least 20"));
        }
    }
    Ok(())
}

fn fmt_plain(v: f64) -> String {
    // Shortest representation that round-trips.
    format!("{v}")
}

/// Canonical text form; `parse(dump(cfg))` reproduces `cfg` exactly.
pub fn dump(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    out.push_str("[channel]\n");
    out.push_str(&format!(
        "kind = {}\n",
        match cfg.kind {
            ChannelKind::Ou => "ou",
            ChannelKind::Uncorrelated => "uncorrelated",
        }
    ));
    if let Some((a, b)) = cfg.ab {
        out.push_str(&format!("a = {}\n", fmt_plain(a)));
        out.push_str(&format!("b = {}\n", fmt_plain(b)));
    } else {
        let ds: Vec<String> = cfg.ds.iter().map(|&d| fmt_plain(d)).collect();
        out.push_str(&format!("d = {}\n", ds.join(", ")));
    }
    out.push_str("\n[scenario]\n");
    out.push_str(&format!("w = {}\n", fmt_plain(cfg.w)));
    let rhos: Vec<String> = cfg.rho_grid.iter().map(|&r| fmt_plain(r)).collect();
    out.push_str(&format!("rho = {}\n", rhos.join(", ")));
    out.push_str(&format!("grid_size = {}\n", cfg.grid_size));
    if let Some(mc) = &cfg.mc {
        out.push_str("\n[mc]\n");
        out.push_str(&format!("n = {}\n", mc.n));
        out.push_str(&format!("seed = {}\n", mc.seed));
        out.push_str(&format!("m = {}\n", mc.m));
        out.push_str(&format!("t_factor = {}\n", fmt_plain(mc.t_factor)));
    }
    out
}
