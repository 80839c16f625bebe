//! `ZEROS v1` text files.
//!
//! ```text
//! ZEROS v1
//! q=4 chi=1 height=60
//! # comment
//! 6.0209489046975966549 1
//! ```
//!
//! `chi` is the canonical index from [`super::CharacterGroup`]. Gammas are
//! written with Rust's shortest round-trip formatting, so save/load is
//! bit-exact. Blank lines and `#` comments are ignored anywhere.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{CharacterGroup, ZeroError, ZeroList, ZeroSource};

pub const MAGIC: &str = "ZEROS v1";

fn io_err(path: &Path, source: std::io::Error) -> ZeroError {
    ZeroError::Io { path: path.to_path_buf(), source }
}

pub fn write_zeros<W: Write>(zl: &ZeroList, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "q={} chi={} height={}", zl.q(), zl.chi_index(), zl.height())?;
    for (g, m) in zl.gammas().iter().zip(zl.multiplicities()) {
        writeln!(w, "{g} {m}")?;
    }
    Ok(())
}

pub fn save_zeros(zl: &ZeroList, path: &Path) -> Result<(), ZeroError> {
    let mut buf = Vec::new();
    write_zeros(zl, &mut buf).map_err(|e| io_err(path, e))?;
    fs::write(path, buf).map_err(|e| io_err(path, e))
}

pub fn load_zeros(path: &Path) -> Result<ZeroList, ZeroError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_zeros(&text)
}

/// Like [`load_zeros`], but the header must name modulus `q` and index `chi`.
pub fn load_zeros_expecting(path: &Path, q: u64, chi: usize) -> Result<ZeroList, ZeroError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_zeros_expecting(&text, Some((q, Some(chi))))
}

/// Like [`load_zeros`], but the header must name modulus `q`.
pub fn load_zeros_for_modulus(path: &Path, q: u64) -> Result<ZeroList, ZeroError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_zeros_expecting(&text, Some((q, None)))
}

pub fn parse_zeros(text: &str) -> Result<ZeroList, ZeroError> {
    parse_zeros_expecting(text, None)
}

fn parse_err(line: usize, msg: impl Into<String>) -> ZeroError {
    ZeroError::Parse { line, msg: msg.into() }
}

fn header_field<'a>(line: usize, token: Option<&'a str>, key: &str) -> Result<&'a str, ZeroError> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing `{key}=` in header")))?;
    token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| parse_err(line, format!("expected `{key}=...`, found `{token}`")))
}

fn parse_zeros_expecting(text: &str, expect: Option<(u64, Option<usize>)>) -> Result<ZeroList, ZeroError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (n, magic) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if magic != MAGIC {
        return Err(parse_err(n, format!("expected `{MAGIC}`, found `{magic}`")));
    }

    let (hn, header) = lines.next().ok_or_else(|| parse_err(n + 1, "missing header line"))?;
    let mut tokens = header.split_whitespace();
    let q: u64 = header_field(hn, tokens.next(), "q")?
        .parse()
        .map_err(|e| parse_err(hn, format!("bad q: {e}")))?;
    let chi: usize = header_field(hn, tokens.next(), "chi")?
        .parse()
        .map_err(|e| parse_err(hn, format!("bad chi: {e}")))?;
    let height: f64 = header_field(hn, tokens.next(), "height")?
        .parse()
        .map_err(|e| parse_err(hn, format!("bad height: {e}")))?;
    if let Some(extra) = tokens.next() {
        return Err(parse_err(hn, format!("unexpected header token `{extra}`")));
    }
    if let Some((eq, echi)) = expect {
        if q != eq {
            return Err(ZeroError::ModulusMismatch { line: hn, expected: eq, found: q });
        }
        if let Some(echi) = echi.filter(|&e| e != chi) {
            return Err(ZeroError::CharacterMismatch { line: hn, expected: echi, found: chi });
        }
    }
    let group = CharacterGroup::new(q).map_err(|e| parse_err(hn, e.to_string()))?;
    if chi >= group.len() {
        return Err(parse_err(hn, format!("chi={chi} out of range, q={q} has {} characters", group.len())));
    }
    if !(height.is_finite() && height >= 0.0) {
        return Err(parse_err(hn, format!("height {height} must be finite and non-negative")));
    }

    let mut gammas = Vec::new();
    let mut mults = Vec::new();
    for (ln, line) in lines {
        let mut parts = line.split_whitespace();
        let g: f64 = parts
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|e| parse_err(ln, format!("bad gamma: {e}")))?;
        let m: u32 = match parts.next() {
            Some(tok) => tok.parse().map_err(|e| parse_err(ln, format!("bad multiplicity: {e}")))?,
            None => return Err(parse_err(ln, "missing multiplicity")),
        };
        if parts.next().is_some() {
            return Err(parse_err(ln, "expected `<gamma> <multiplicity>`"));
        }
        if !(g.is_finite() && g > 0.0) {
            return Err(parse_err(ln, format!("gamma {g} must be positive")));
        }
        if g > height {
            return Err(parse_err(ln, format!("gamma {g} exceeds height {height}")));
        }
        if let Some(&prev) = gammas.last() {
            if g <= prev {
                return Err(parse_err(ln, format!("gamma {g} not ascending after {prev}")));
            }
        }
        if m == 0 {
            return Err(parse_err(ln, "multiplicity must be positive"));
        }
        gammas.push(g);
        mults.push(m);
    }
    ZeroList::new(q, chi, gammas, mults, height, ZeroSource::Ingested)
}
