//! Netlist text format, parser and validator.
//!
//! ```text
//! # comment
//! circuit "two_loop" formulation loop coords 2
//! element L1  L  value=1.0 coords +1
//! element RM1 MR curve=poly(0,1,0,0.3333333333) mod=q coords +1
//! element CM1 MC curve=poly(0,2.0) mod=sigma coords +1 -2
//! element R1  R  value=0.5 coords +2
//! ```
//!
//! Loop membership is declared explicitly: every element lists the signed
//! coordinates (loops or nodes) it belongs to, and its branch state is the
//! signed sum of those coordinates.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::constitutive::{Element, ElementKind, ElementValue, Incidence, Modulation, SourceWaveform};
use crate::curve::ScalarCurve;
use crate::error::{Error, Result};

/// Which generalized coordinates the circuit is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// Integrated loop charges `σ`.
    Loop,
    /// Integrated node fluxes `ρ`.
    Node,
}

impl Formulation {
    pub fn keyword(self) -> &'static str {
        match self {
            Formulation::Loop => "loop",
            Formulation::Node => "node",
        }
    }

    /// Symbol used for coordinate columns in outputs.
    pub fn coordinate_symbol(self) -> &'static str {
        match self {
            Formulation::Loop => "sigma",
            Formulation::Node => "rho",
        }
    }

    /// Memory-element modulation accepted by this formulation.
    pub fn admits(self, kind: ElementKind, modulation: Modulation) -> bool {
        use ElementKind::*;
        use Modulation::*;
        match self {
            Formulation::Loop => matches!(
                (kind, modulation),
                (Memristor, Charge) | (Meminductor, Charge) | (Memcapacitor, IntegratedCharge)
            ),
            Formulation::Node => matches!(
                (kind, modulation),
                (Memristor, Flux) | (Meminductor, IntegratedFlux) | (Memcapacitor, Flux)
            ),
        }
    }

    /// Whether `kind` stores energy in the velocity-like variable here.
    pub fn is_inertial(self, kind: ElementKind) -> bool {
        match self {
            Formulation::Loop => matches!(kind, ElementKind::Inductor | ElementKind::Meminductor),
            Formulation::Node => matches!(kind, ElementKind::Capacitor | ElementKind::Memcapacitor),
        }
    }

    pub fn is_dissipative(kind: ElementKind) -> bool {
        matches!(kind, ElementKind::Resistor | ElementKind::Memristor)
    }

    pub fn source_kind(self) -> ElementKind {
        match self {
            Formulation::Loop => ElementKind::VoltageSource,
            Formulation::Node => ElementKind::CurrentSource,
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A parsed netlist.
#[derive(Clone, Debug)]
pub struct Circuit {
    pub name: String,
    pub formulation: Formulation,
    pub n_coords: usize,
    pub elements: Vec<Element>,
    /// Source line of each element, parallel to `elements`; not part of equality.
    pub element_lines: Vec<usize>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.formulation == other.formulation
            && self.n_coords == other.n_coords
            && self.elements == other.elements
    }
}

impl Circuit {
    /// Builds a circuit from elements, checking coordinate references.
    pub fn new(
        name: impl Into<String>,
        formulation: Formulation,
        n_coords: usize,
        elements: Vec<Element>,
    ) -> Result<Self> {
        if n_coords == 0 {
            return Err(Error::InvalidArgument("circuit needs at least one coordinate".into()));
        }
        if elements.is_empty() {
            return Err(Error::InvalidArgument("circuit has no elements".into()));
        }
        let mut names = HashSet::new();
        for e in &elements {
            if !names.insert(e.name.as_str()) {
                return Err(Error::InvalidElement {
                    name: e.name.clone(),
                    reason: "duplicate element name".into(),
                });
            }
            check_membership(&e.membership, n_coords).map_err(|reason| Error::InvalidElement {
                name: e.name.clone(),
                reason,
            })?;
        }
        let element_lines = (0..elements.len()).map(|k| k + 2).collect();
        Ok(Self {
            name: name.into(),
            formulation,
            n_coords,
            elements,
            element_lines,
        })
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name == name)
    }

    /// Canonical netlist text; reparses to an equal circuit.
    pub fn serialize(&self) -> String {
        let mut out = format!(
            "circuit {} formulation {} coords {}\n",
            quote(&self.name),
            self.formulation,
            self.n_coords
        );
        for e in &self.elements {
            out.push_str(&format!("element {} {} ", e.name, e.kind));
            match &e.value {
                ElementValue::Linear(v) => out.push_str(&format!("value={v:?}")),
                ElementValue::Curve { curve, modulation } => {
                    out.push_str(&format!("curve={} mod={modulation}", curve.literal()))
                }
                ElementValue::Source(w) => match w.shape {
                    crate::constitutive::WaveShape::Dc => {
                        out.push_str(&format!("shape=dc amp={:?}", w.amplitude))
                    }
                    crate::constitutive::WaveShape::Sine { omega, phase } => out.push_str(&format!(
                        "shape=sin amp={:?} omega={omega:?} phase={phase:?}",
                        w.amplitude
                    )),
                },
            }
            out.push_str(" coords");
            for inc in &e.membership {
                out.push_str(&format!(" {}{}", if inc.sign < 0 { '-' } else { '+' }, inc.coord));
            }
            out.push('\n');
        }
        out
    }
}

fn check_membership(membership: &[Incidence], n_coords: usize) -> std::result::Result<(), String> {
    if membership.is_empty() {
        return Err("element references no coordinate".into());
    }
    let mut seen = HashSet::new();
    for inc in membership {
        if inc.coord == 0 || inc.coord > n_coords {
            return Err(format!("coordinate {} outside [1, {n_coords}]", inc.coord));
        }
        if !seen.insert(inc.coord) {
            return Err(format!("coordinate {} referenced twice", inc.coord));
        }
    }
    Ok(())
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.line {
            Some(line) => write!(f, "{sev}[{}] line {line}: {}", self.code, self.message),
            None => write!(f, "{sev}[{}]: {}", self.code, self.message),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub entries: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn has_errors(&self) -> bool {
        self.entries.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.entries.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.entries.iter().filter(|d| d.severity == Severity::Warning)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Converts into an error if any entry has error severity.
    pub fn into_result(self) -> Result<Vec<Diagnostic>> {
        if self.has_errors() {
            let msg = self
                .errors()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::Validation(msg))
        } else {
            Ok(self.entries)
        }
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.entries {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Checks formulation compatibility and that every coordinate has dynamics.
///
/// Element entries come first, sorted by element name; coordinate entries
/// follow in coordinate order. The result does not depend on declaration
/// order apart from the reported line numbers.
pub fn validate(circuit: &Circuit) -> Diagnostics {
    let form = circuit.formulation;
    let mut element_diags: Vec<(String, Diagnostic)> = Vec::new();
    let mut inertial = vec![false; circuit.n_coords];
    let mut dissipative = vec![false; circuit.n_coords];

    for (k, e) in circuit.elements.iter().enumerate() {
        let line = circuit.element_lines.get(k).copied();
        if let Some((_, modulation)) = e.curve() {
            if !form.admits(e.kind, modulation) {
                let needed = match form {
                    Formulation::Loop => Formulation::Node,
                    Formulation::Node => Formulation::Loop,
                };
                element_diags.push((
                    e.name.clone(),
                    Diagnostic {
                        severity: Severity::Error,
                        code: "modulation-formulation",
                        message: format!(
                            "element {}: {} mod={modulation} modulation requires {needed} analysis",
                            e.name, e.kind
                        ),
                        line,
                    },
                ));
                continue;
            }
        }
        if e.kind.is_source() && e.kind != form.source_kind() {
            element_diags.push((
                e.name.clone(),
                Diagnostic {
                    severity: Severity::Error,
                    code: "source-formulation",
                    message: format!(
                        "element {}: {} sources are not allowed in {form} analysis (use {})",
                        e.name,
                        e.kind,
                        form.source_kind()
                    ),
                    line,
                },
            ));
            continue;
        }
        for inc in &e.membership {
            if inc.coord == 0 || inc.coord > circuit.n_coords {
                continue;
            }
            if form.is_inertial(e.kind) {
                inertial[inc.index()] = true;
            }
            if Formulation::is_dissipative(e.kind) {
                dissipative[inc.index()] = true;
            }
        }
    }
    element_diags.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.code.cmp(b.1.code)));

    let mut entries: Vec<Diagnostic> = element_diags.into_iter().map(|(_, d)| d).collect();
    for i in 0..circuit.n_coords {
        if !inertial[i] && !dissipative[i] {
            entries.push(Diagnostic {
                severity: Severity::Error,
                code: "no-dynamics",
                message: format!("coordinate {} has no inertial or dissipative element", i + 1),
                line: None,
            });
        } else if !inertial[i] {
            entries.push(Diagnostic {
                severity: Severity::Warning,
                code: "first-order",
                message: format!("coordinate {} is first-order", i + 1),
                line: None,
            });
        }
    }
    Diagnostics { entries }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone)]
struct Token {
    text: String,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a line into whitespace-separated tokens. Parentheses, brackets and
/// double quotes group, so `poly(0, 1)` stays one token. Comments start at
/// an unquoted `#`.
fn tokenize(line_no: usize, line: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let mut depth: i32 = 0;
    let mut in_quote = false;
    let mut escaped = false;
    let mut quote_col = 0;
    for (idx, c) in line.chars().enumerate() {
        let col = idx + 1;
        if in_quote {
            current.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_quote = false;
            }
            continue;
        }
        match c {
            '#' if depth == 0 => break,
            c if c.is_whitespace() && depth == 0 => {
                if !current.is_empty() {
                    tokens.push(Token {
                        text: std::mem::take(&mut current),
                        column: start,
                    });
                }
            }
            c if c.is_whitespace() => {}
            _ => {
                if current.is_empty() {
                    start = col;
                }
                match c {
                    '(' | '[' => depth += 1,
                    ')' | ']' => {
                        depth -= 1;
                        if depth < 0 {
                            return Err(syntax(line_no, col, format!("unbalanced `{c}`")));
                        }
                    }
                    '"' => {
                        in_quote = true;
                        quote_col = col;
                    }
                    _ => {}
                }
                current.push(c);
            }
        }
    }
    if in_quote {
        return Err(syntax(line_no, quote_col, "unterminated string"));
    }
    if depth != 0 {
        return Err(syntax(line_no, start, "unbalanced brackets"));
    }
    if !current.is_empty() {
        tokens.push(Token {
            text: current,
            column: start,
        });
    }
    Ok(tokens)
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v = f64::from_str(s.trim()).map_err(|_| format!("expected a real number, found `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number `{s}`"))
    }
}

fn parse_uint(s: &str) -> std::result::Result<usize, String> {
    usize::from_str(s).map_err(|_| format!("expected a positive integer, found `{s}`"))
}

fn unquote(s: &str) -> std::result::Result<String, String> {
    let inner = s
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .ok_or_else(|| format!("expected a quoted string, found `{s}`"))?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(n) => out.push(n),
                None => return Err("dangling escape in string".into()),
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

/// Splits `a,b,(c,d)` on top-level commas.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn delimited<'a>(s: &'a str, prefix: &str, open: char, close: char) -> Option<&'a str> {
    s.strip_prefix(prefix)?
        .trim_start()
        .strip_prefix(open)?
        .strip_suffix(close)
}

/// Parses `poly(...)` or `pwl((x,y),...)` with an optional domain.
pub fn parse_curve(literal: &str, domain: Option<(f64, f64)>) -> std::result::Result<ScalarCurve, String> {
    let literal = literal.trim();
    if let Some(body) = delimited(literal, "poly", '(', ')') {
        let coeffs = split_top_level(body)
            .into_iter()
            .map(parse_real)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let curve = match domain {
            Some(d) => ScalarCurve::polynomial_on(coeffs, d),
            None => ScalarCurve::polynomial(coeffs),
        };
        return curve.map_err(|e| e.to_string());
    }
    if let Some(body) = delimited(literal, "pwl", '(', ')') {
        let mut points = Vec::new();
        for part in split_top_level(body) {
            let pair = delimited(part.trim(), "", '(', ')')
                .ok_or_else(|| format!("malformed pwl breakpoint `{part}`"))?;
            let xy = split_top_level(pair);
            if xy.len() != 2 {
                return Err(format!("pwl breakpoint `{part}` must have two entries"));
            }
            points.push((parse_real(xy[0])?, parse_real(xy[1])?));
        }
        let curve = match domain {
            Some(d) => ScalarCurve::piecewise_linear_on(points, d),
            None => ScalarCurve::piecewise_linear(points),
        };
        return curve.map_err(|e| e.to_string());
    }
    Err(format!("malformed curve literal `{literal}`"))
}

fn parse_domain(s: &str) -> std::result::Result<(f64, f64), String> {
    let body = delimited(s, "", '[', ']').ok_or_else(|| format!("malformed domain `{s}`"))?;
    let parts = split_top_level(body);
    if parts.len() != 2 {
        return Err(format!("domain `{s}` must have two bounds"));
    }
    Ok((parse_real(parts[0])?, parse_real(parts[1])?))
}

fn parse_signed(s: &str) -> std::result::Result<Incidence, String> {
    let (sign, digits) = match s.as_bytes().first() {
        Some(b'+') => (1, &s[1..]),
        Some(b'-') => (-1, &s[1..]),
        _ => (1, s),
    };
    let coord = usize::from_str(digits).map_err(|_| format!("expected a signed coordinate, found `{s}`"))?;
    Ok(Incidence::new(coord, sign))
}

/// Parses netlist text into a circuit. Errors carry the 1-based line and
/// column of the offending token.
pub fn parse(text: &str) -> Result<Circuit> {
    let mut header: Option<(String, Formulation, usize)> = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut lines: Vec<usize> = Vec::new();
    let mut last_line = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let tokens = tokenize(line_no, raw)?;
        let Some(first) = tokens.first() else {
            continue;
        };
        match first.text.as_str() {
            "circuit" => {
                if header.is_some() {
                    return Err(syntax(line_no, first.column, "duplicate circuit header"));
                }
                header = Some(parse_header(line_no, &tokens)?);
            }
            "element" => {
                let Some((_, _, n_coords)) = header else {
                    return Err(syntax(line_no, first.column, "element before circuit header"));
                };
                let element = parse_element(line_no, &tokens, n_coords)?;
                if elements.iter().any(|e| e.name == element.name) {
                    return Err(syntax(
                        line_no,
                        tokens[1].column,
                        format!("duplicate element name `{}`", element.name),
                    ));
                }
                elements.push(element);
                lines.push(line_no);
            }
            other => {
                return Err(syntax(
                    line_no,
                    first.column,
                    format!("expected `circuit` or `element`, found `{other}`"),
                ))
            }
        }
    }

    let Some((name, formulation, n_coords)) = header else {
        return Err(syntax(last_line, 1, "missing circuit header"));
    };
    if elements.is_empty() {
        return Err(syntax(last_line, 1, "circuit has no elements"));
    }
    Ok(Circuit {
        name,
        formulation,
        n_coords,
        elements,
        element_lines: lines,
    })
}

fn expect<'a>(line: usize, tokens: &'a [Token], at: usize, what: &str) -> Result<&'a Token> {
    tokens.get(at).ok_or_else(|| {
        let col = tokens.last().map(|t| t.column + t.text.chars().count()).unwrap_or(1);
        syntax(line, col, format!("expected {what}, found end of line"))
    })
}

fn expect_keyword(line: usize, tokens: &[Token], at: usize, keyword: &str) -> Result<()> {
    let t = expect(line, tokens, at, &format!("`{keyword}`"))?;
    if t.text == keyword {
        Ok(())
    } else {
        Err(syntax(line, t.column, format!("expected `{keyword}`, found `{}`", t.text)))
    }
}

fn parse_header(line: usize, tokens: &[Token]) -> Result<(String, Formulation, usize)> {
    let name_tok = expect(line, tokens, 1, "circuit name")?;
    let name = unquote(&name_tok.text).map_err(|m| syntax(line, name_tok.column, m))?;
    expect_keyword(line, tokens, 2, "formulation")?;
    let form_tok = expect(line, tokens, 3, "`loop` or `node`")?;
    let formulation = match form_tok.text.as_str() {
        "loop" => Formulation::Loop,
        "node" => Formulation::Node,
        other => {
            return Err(syntax(
                line,
                form_tok.column,
                format!("expected `loop` or `node`, found `{other}`"),
            ))
        }
    };
    expect_keyword(line, tokens, 4, "coords")?;
    let n_tok = expect(line, tokens, 5, "coordinate count")?;
    let n = parse_uint(&n_tok.text).map_err(|m| syntax(line, n_tok.column, m))?;
    if n == 0 {
        return Err(syntax(line, n_tok.column, "coordinate count must be positive"));
    }
    if let Some(extra) = tokens.get(6) {
        return Err(syntax(line, extra.column, format!("unexpected token `{}`", extra.text)));
    }
    Ok((name, formulation, n))
}

fn parse_element(line: usize, tokens: &[Token], n_coords: usize) -> Result<Element> {
    let name_tok = expect(line, tokens, 1, "element name")?;
    let name = name_tok.text.clone();
    if !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(syntax(line, name_tok.column, format!("invalid element name `{name}`")));
    }
    let kind_tok = expect(line, tokens, 2, "element kind")?;
    let kind = ElementKind::from_str(&kind_tok.text).map_err(|m| syntax(line, kind_tok.column, m))?;

    // key=value parameters up to `coords`
    let mut params: Vec<(&str, &str, usize)> = Vec::new();
    let mut at = 3;
    while let Some(t) = tokens.get(at) {
        if t.text == "coords" {
            break;
        }
        let (key, value) = t
            .text
            .split_once('=')
            .ok_or_else(|| syntax(line, t.column, format!("expected key=value, found `{}`", t.text)))?;
        if params.iter().any(|(k, _, _)| *k == key) {
            return Err(syntax(line, t.column, format!("duplicate parameter `{key}`")));
        }
        params.push((key, value, t.column));
        at += 1;
    }
    expect_keyword(line, tokens, at, "coords")?;
    let coords_col = tokens[at].column;
    let mut membership = Vec::new();
    for t in &tokens[at + 1..] {
        let inc = parse_signed(&t.text).map_err(|m| syntax(line, t.column, m))?;
        if inc.coord == 0 || inc.coord > n_coords {
            return Err(syntax(
                line,
                t.column,
                format!("coordinate {} outside [1, {n_coords}]", inc.coord),
            ));
        }
        if membership.iter().any(|m: &Incidence| m.coord == inc.coord) {
            return Err(syntax(line, t.column, format!("coordinate {} referenced twice", inc.coord)));
        }
        membership.push(inc);
    }
    if membership.is_empty() {
        return Err(syntax(line, coords_col, "element references no coordinate"));
    }

    let take = |key: &str| params.iter().find(|(k, _, _)| *k == key).map(|(_, v, c)| (*v, *c));
    let allowed: &[&str] = match kind {
        k if k.is_conventional() => &["value"],
        k if k.is_memory() => &["curve", "mod", "domain"],
        _ => &["shape", "amp", "omega", "phase"],
    };
    for (key, _, col) in &params {
        if !allowed.contains(key) {
            return Err(syntax(line, *col, format!("unknown parameter `{key}` for {kind}")));
        }
    }
    let missing = |key: &str| syntax(line, kind_tok.column, format!("{kind} requires `{key}=`"));

    let value = if kind.is_conventional() {
        let (v, col) = take("value").ok_or_else(|| missing("value"))?;
        let v = parse_real(v).map_err(|m| syntax(line, col, m))?;
        if v <= 0.0 {
            return Err(syntax(line, col, format!("{kind} value must be positive, got {v}")));
        }
        ElementValue::Linear(v)
    } else if kind.is_memory() {
        let domain = match take("domain") {
            Some((d, col)) => Some(parse_domain(d).map_err(|m| syntax(line, col, m))?),
            None => None,
        };
        let (lit, col) = take("curve").ok_or_else(|| missing("curve"))?;
        let curve = parse_curve(lit, domain).map_err(|m| syntax(line, col, m))?;
        let (m, mcol) = take("mod").ok_or_else(|| missing("mod"))?;
        let modulation = Modulation::from_str(m).map_err(|msg| syntax(line, mcol, msg))?;
        if !kind.modulations().contains(&modulation) {
            return Err(syntax(line, mcol, format!("{kind} does not support mod={modulation}")));
        }
        ElementValue::Curve { curve, modulation }
    } else {
        let (shape, scol) = take("shape").ok_or_else(|| missing("shape"))?;
        let (amp, acol) = take("amp").ok_or_else(|| missing("amp"))?;
        let amp = parse_real(amp).map_err(|m| syntax(line, acol, m))?;
        let waveform = match shape {
            "dc" => {
                if let Some((_, col)) = take("omega").or_else(|| take("phase")) {
                    return Err(syntax(line, col, "dc sources take no omega/phase"));
                }
                SourceWaveform::dc(amp)
            }
            "sin" => {
                let (omega, ocol) = take("omega").ok_or_else(|| missing("omega"))?;
                let omega = parse_real(omega).map_err(|m| syntax(line, ocol, m))?;
                let phase = match take("phase") {
                    Some((p, col)) => parse_real(p).map_err(|m| syntax(line, col, m))?,
                    None => 0.0,
                };
                SourceWaveform::sine(amp, omega, phase).map_err(|e| syntax(line, ocol, e.to_string()))?
            }
            other => return Err(syntax(line, scol, format!("unknown source shape `{other}`"))),
        };
        ElementValue::Source(waveform)
    };

    Element::new(name, kind, value, membership).map_err(|e| syntax(line, name_tok.column, e.to_string()))
}
