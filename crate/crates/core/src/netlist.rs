//! SPICE deck for the op-amp and multiplier realization of the MMO circuit
//! with `g(w) = a + 3 b w²`, plus a small reader for the decks it writes.
//!
//! Node voltages carry scaled state variables: `XB = x̄`, `Y = y`, `Z = z`,
//! `WN = -w/eta` and `GN = -g(w)`. Every integrator is an inverting op-amp
//! stage; multipliers are behavioral sources `OUT = 0.1 X Y`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuits::MmoParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Names of the formula-driven components, in deck order.
pub const COMPONENT_NAMES: [&str; 9] = ["C1", "R1", "R2", "R3", "R4", "R5", "R6", "R7", "V"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct NetlistSpec<T> {
    pub params: MmoParams<T>,
    /// Base resistance in ohms.
    #[serde(rename = "R")]
    pub r: T,
    /// Base capacitance in farads; `R * C` must be one second.
    #[serde(rename = "C")]
    pub c: T,
}

impl<T: Scalar> NetlistSpec<T> {
    pub fn new(params: MmoParams<T>, r: T, c: T) -> Self {
        Self { params, r, c }
    }

    /// `R = 100 kΩ`, `C = 10 µF`.
    pub fn with_default_base(params: MmoParams<T>) -> Self {
        Self::new(params, T::lit(1e5), T::lit(1e-5))
    }

    /// `(a, b)` of `g(w) = a + 3 b w²`.
    pub fn quadratic(&self) -> Result<(T, T)> {
        let c = self.params.g.coefficients();
        let at = |i: usize| c.get(i).copied().unwrap_or_else(T::zero);
        if c.len() > 3 || at(1) != T::zero() {
            return Err(Error::InvalidParameter("g must have the form a + 3 b w^2".into()));
        }
        Ok((at(0), at(2) / T::lit(3.0)))
    }
}

/// Component values computed from the realization formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentValues<T> {
    #[serde(rename = "C1")]
    pub c1: T,
    #[serde(rename = "R1")]
    pub r1: T,
    #[serde(rename = "R2")]
    pub r2: T,
    #[serde(rename = "R3")]
    pub r3: T,
    #[serde(rename = "R4")]
    pub r4: T,
    #[serde(rename = "R5")]
    pub r5: T,
    #[serde(rename = "R6")]
    pub r6: T,
    #[serde(rename = "R7")]
    pub r7: T,
    #[serde(rename = "V")]
    pub v: T,
}

impl<T: Scalar> ComponentValues<T> {
    /// `(name, value)` in [`COMPONENT_NAMES`] order.
    pub fn entries(&self) -> [(&'static str, T); 9] {
        let v = [self.c1, self.r1, self.r2, self.r3, self.r4, self.r5, self.r6, self.r7, self.v];
        core::array::from_fn(|i| (COMPONENT_NAMES[i], v[i]))
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.entries().iter().map(|(k, v)| (k.to_string(), v.as_f64())).collect()
    }
}

pub fn component_values<T: Scalar>(spec: &NetlistSpec<T>) -> Result<ComponentValues<T>> {
    let p = &spec.params;
    let (r, c) = (spec.r, spec.c);
    if !(r > T::zero() && c > T::zero()) {
        return Err(Error::InvalidParameter("R and C must be positive".into()));
    }
    if !((r * c - T::one()).abs() <= T::lit(1e-12)) {
        return Err(Error::InvalidParameter("R*C must equal 1 second".into()));
    }
    p.validate()?;
    let (_, b) = spec.quadratic()?;
    if b == T::zero() {
        return Err(Error::MultiplierUndefined);
    }
    if p.k == T::zero() {
        return Err(Error::R7Undefined);
    }
    if p.beta == T::zero() {
        return Err(Error::InvalidParameter("R6 undefined for beta = 0".into()));
    }
    let tenth = T::lit(0.1);
    Ok(ComponentValues {
        c1: c * p.alpha / p.s_c,
        r1: tenth * p.epsilon * r / p.s_c,
        r2: p.eta * p.epsilon * r / p.s_c,
        r3: r / p.s_c,
        r4: tenth * r / (T::lit(3.0) * b * p.eta * p.eta),
        r5: r / p.eta,
        r6: r / (p.beta * p.s_c),
        r7: r / p.k,
        v: p.a_s,
    })
}

/// Shortest representation that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Writes the deck. Lines end with `\n` only.
pub fn emit_netlist<T: Scalar>(spec: &NetlistSpec<T>) -> Result<String> {
    let cv = component_values(spec)?;
    let p = &spec.params;
    let (a, _) = spec.quadratic()?;
    let r = num(spec.r.as_f64());
    let c = num(spec.c.as_f64());
    let (alpha, beta, s_c) = (p.alpha.as_f64(), p.beta.as_f64(), p.s_c.as_f64());
    let slow = alpha * beta;
    let t_est = if slow > 0.0 { 2.0 * PI / (s_c * slow.sqrt()) } else { 2.0 * PI / s_c };
    let stop = 10.0 * t_est;
    let step = t_est / 200.0;

    let mut d = String::new();
    let mut line = |s: &str| {
        d.push_str(s);
        d.push('\n');
    };
    line("* memristive MMO oscillator, g(w) = a + 3 b w^2");
    line("* nodes: XB = x/eta, Y = y, Z = z, WN = -w/eta, GN = -g(w)");
    if alpha != 1.0 {
        line("* C1 = C*alpha/s_c scales the y integrator by s_c/alpha; the model rate s_c*alpha is met only for alpha = 1");
    }
    line(".subckt OPAMP inp inn out");
    line("EGAIN n1 0 inp inn 1e5");
    line("RPOLE n1 n2 1e3");
    line(&format!("CPOLE n2 0 {}", num(1.0 / (2.0 * PI * 1e3 * 100.0))));
    line("EBUF out 0 n2 0 1");
    line(".ends OPAMP");
    line(".subckt MULT x y out ref");
    line("BMUL out ref V=0.1*V(x,ref)*V(y,ref)");
    line(".ends MULT");
    line("* sources: VA = a, VAS = bias a_s (node NAS sits at -a_s)");
    line(&format!("VA NA 0 DC {}", num(a.as_f64())));
    line(&format!("VAS 0 NAS DC {}", num(cv.v.as_f64())));
    line("* multiplier 1 and summer: GN = -(a + 3 b w^2)");
    line("XMULT1 WN WN M1 0 MULT");
    line(&format!("R4 M1 SUMN {}", num(cv.r4.as_f64())));
    line(&format!("RSA NA SUMN {r}"));
    line(&format!("RSF SUMN GN {r}"));
    line("XSUM 0 SUMN GN OPAMP");
    line("* multiplier 2 and inverter: P = 0.1 g(w) x/eta");
    line("XMULT2 XB GN M2 0 MULT");
    line(&format!("RI2 M2 INV2N {r}"));
    line(&format!("RF2 INV2N P {r}"));
    line("XINV2 0 INV2N P OPAMP");
    line("* x integrator");
    line(&format!("R1 P XN {}", num(cv.r1.as_f64())));
    line(&format!("R2 Y XN {}", num(cv.r2.as_f64())));
    line(&format!("CX XN XB {c}"));
    line("XOPX 0 XN XB OPAMP");
    line("* inverter: XBN = -x/eta");
    line(&format!("RI1 XB INV1N {r}"));
    line(&format!("RF1 INV1N XBN {r}"));
    line("XINV1 0 INV1N XBN OPAMP");
    line("* y integrator");
    line(&format!("R5 XBN YN {}", num(cv.r5.as_f64())));
    line(&format!("R7 Y YN {}", num(cv.r7.as_f64())));
    line(&format!("RZ Z YN {r}"));
    line(&format!("RAS NAS YN {r}"));
    line(&format!("C1 YN Y {}", num(cv.c1.as_f64())));
    line("XOPY 0 YN Y OPAMP");
    line("* z integrator");
    line(&format!("R6 Y ZN {}", num(cv.r6.as_f64())));
    line(&format!("CZ ZN Z {c}"));
    line("XOPZ 0 ZN Z OPAMP");
    line("* w integrator");
    line(&format!("R3 XB WN_N {}", num(cv.r3.as_f64())));
    line(&format!("CW WN_N WN {c}"));
    line("XOPW 0 WN_N WN OPAMP");
    line(&format!(".tran {} {} 0 {} uic", num(step), num(stop), num(step)));
    line(".end");
    Ok(d)
}

/// One element line of a parsed deck.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub nodes: Vec<String>,
    /// Numeric value for R, C, L, V, I and E elements.
    pub value: Option<f64>,
    /// Subcircuit name for X elements, expression for B elements.
    pub model: Option<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Subcircuit {
    pub ports: Vec<String>,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedDeck {
    pub title: String,
    pub elements: Vec<Element>,
    pub subcircuits: HashMap<String, Subcircuit>,
    /// `(step, stop)` of the `.tran` card.
    pub tran: Option<(f64, f64)>,
}

impl ParsedDeck {
    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name.eq_ignore_ascii_case(name))
    }

    /// The formula-driven values; `V` is read from the bias source `VAS`.
    pub fn component_map(&self) -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        for name in COMPONENT_NAMES {
            let el_name = if name == "V" { "VAS" } else { name };
            let el = self.element(el_name).ok_or(Error::NetlistParse { line: 0, msg: format!("missing {el_name}") })?;
            let v = el.value.ok_or(Error::NetlistParse { line: el.line, msg: format!("{el_name} has no value") })?;
            out.insert(name.to_string(), v);
        }
        Ok(out)
    }
}

/// Parses a SPICE number with an optional scale suffix (`1k`, `2.2u`,
/// `3meg`, `1e-5F`).
pub fn parse_value(s: &str) -> Option<f64> {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let digits_start = i;
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i == digits_start {
        return None;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    let mantissa: f64 = s[..i].parse().ok()?;
    let suffix = s[i..].to_ascii_lowercase();
    let scale = if suffix.starts_with("meg") {
        1e6
    } else if suffix.starts_with("mil") {
        25.4e-6
    } else {
        match suffix.chars().next() {
            None => 1.0,
            Some('t') => 1e12,
            Some('g') => 1e9,
            Some('k') => 1e3,
            Some('m') => 1e-3,
            Some('u') => 1e-6,
            Some('n') => 1e-9,
            Some('p') => 1e-12,
            Some('f') => 1e-15,
            Some(c) if c.is_ascii_alphabetic() => 1.0,
            Some(_) => return None,
        }
    };
    Some(if scale == 1.0 { mantissa } else { mantissa * scale })
}

fn parse_element(tokens: &[&str], line: usize) -> Result<Element> {
    let err = |msg: String| Error::NetlistParse { line, msg };
    let name = tokens[0].to_string();
    let kind = name.chars().next().unwrap_or(' ').to_ascii_uppercase();
    let value_at = |i: usize| -> Result<f64> {
        let tok = tokens.get(i).ok_or_else(|| err(format!("{name}: missing value")))?;
        parse_value(tok).ok_or_else(|| err(format!("{name}: bad value {tok:?}")))
    };
    let nodes = |n: usize| -> Result<Vec<String>> {
        if tokens.len() < n + 1 {
            return Err(err(format!("{name}: expected {n} nodes")));
        }
        Ok(tokens[1..=n].iter().map(|s| s.to_string()).collect())
    };
    match kind {
        'R' | 'C' | 'L' => {
            if tokens.len() < 4 {
                return Err(err(format!("{name}: expected two nodes and a value")));
            }
            Ok(Element { nodes: nodes(2)?, value: Some(value_at(3)?), model: None, name, line })
        }
        'V' | 'I' => {
            let n = nodes(2)?;
            let idx = if tokens.get(3).is_some_and(|t| t.eq_ignore_ascii_case("dc")) { 4 } else { 3 };
            Ok(Element { nodes: n, value: Some(value_at(idx)?), model: None, name, line })
        }
        'E' => Ok(Element { nodes: nodes(4)?, value: Some(value_at(5)?), model: None, name, line }),
        'B' => {
            let n = nodes(2)?;
            let expr = tokens[3..].join(" ");
            if !(expr.starts_with("V=") || expr.starts_with("I=") || expr.starts_with("v=") || expr.starts_with("i=")) {
                return Err(err(format!("{name}: behavioral source needs V= or I=")));
            }
            Ok(Element { nodes: n, value: None, model: Some(expr), name, line })
        }
        'X' => {
            if tokens.len() < 3 {
                return Err(err(format!("{name}: subcircuit call needs nodes and a name")));
            }
            let n = tokens[1..tokens.len() - 1].iter().map(|s| s.to_string()).collect();
            Ok(Element { nodes: n, value: None, model: Some(tokens[tokens.len() - 1].to_string()), name, line })
        }
        _ => Err(err(format!("unsupported element {name}"))),
    }
}

/// Reads a deck: title line, `*` comments, `+` continuations, `.subckt`
/// blocks, `.tran` and `.end`.
pub fn parse_netlist(text: &str) -> Result<ParsedDeck> {
    let mut logical: Vec<(usize, String)> = Vec::new();
    let mut deck = ParsedDeck::default();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        if k == 0 {
            deck.title = raw.trim().to_string();
            continue;
        }
        let content = raw.split(';').next().unwrap_or("").trim();
        if content.is_empty() || content.starts_with('*') {
            continue;
        }
        if let Some(rest) = content.strip_prefix('+') {
            let last = logical
                .last_mut()
                .ok_or(Error::NetlistParse { line: line_no, msg: "continuation without a preceding line".into() })?;
            last.1.push(' ');
            last.1.push_str(rest.trim());
        } else {
            logical.push((line_no, content.to_string()));
        }
    }

    let mut current: Option<(String, Subcircuit, usize)> = None;
    let mut ended = false;
    for (line, content) in &logical {
        let line = *line;
        if ended {
            break;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let head = tokens[0].to_ascii_lowercase();
        let err = |msg: &str| Error::NetlistParse { line, msg: msg.to_string() };
        match head.as_str() {
            ".subckt" => {
                if current.is_some() {
                    return Err(err("nested .subckt"));
                }
                if tokens.len() < 3 {
                    return Err(err(".subckt needs a name and ports"));
                }
                let ports = tokens[2..].iter().map(|s| s.to_string()).collect();
                current = Some((tokens[1].to_string(), Subcircuit { ports, elements: Vec::new() }, line));
            }
            ".ends" => {
                let (name, sub, _) = current.take().ok_or_else(|| err(".ends without .subckt"))?;
                if tokens.len() > 1 && !tokens[1].eq_ignore_ascii_case(&name) {
                    return Err(err(".ends name does not match"));
                }
                deck.subcircuits.insert(name.to_ascii_uppercase(), sub);
            }
            ".tran" => {
                if tokens.len() < 3 {
                    return Err(err(".tran needs step and stop"));
                }
                let step = parse_value(tokens[1]).ok_or_else(|| err("bad .tran step"))?;
                let stop = parse_value(tokens[2]).ok_or_else(|| err("bad .tran stop"))?;
                if !(step > 0.0 && stop > step) {
                    return Err(err(".tran needs 0 < step < stop"));
                }
                deck.tran = Some((step, stop));
            }
            ".end" => ended = true,
            h if h.starts_with('.') => {}
            _ => {
                let el = parse_element(&tokens, line)?;
                match current.as_mut() {
                    Some((_, sub, _)) => sub.elements.push(el),
                    None => deck.elements.push(el),
                }
            }
        }
    }
    if let Some((_, _, line)) = current {
        return Err(Error::NetlistParse { line, msg: "unterminated .subckt".into() });
    }
    if !ended {
        return Err(Error::NetlistParse { line: text.lines().count(), msg: "missing .end".into() });
    }
    let mut seen = HashMap::new();
    let all = deck.elements.iter().chain(deck.subcircuits.values().flat_map(|s| s.elements.iter()));
    for el in all {
        if let Some(model) = el.name.starts_with(['X', 'x']).then_some(el.model.as_deref()).flatten() {
            let sub = deck
                .subcircuits
                .get(&model.to_ascii_uppercase())
                .ok_or(Error::NetlistParse { line: el.line, msg: format!("unknown subcircuit {model}") })?;
            if sub.ports.len() != el.nodes.len() {
                return Err(Error::NetlistParse { line: el.line, msg: format!("{} expects {} nodes", model, sub.ports.len()) });
            }
        }
    }
    for el in &deck.elements {
        if let Some(prev) = seen.insert(el.name.to_ascii_uppercase(), el.line) {
            return Err(Error::NetlistParse { line: el.line, msg: format!("{} already defined on line {prev}", el.name) });
        }
    }
    Ok(deck)
}

/// Writes a `name = value` table, mostly for diagnostics.
pub fn describe(values: &BTreeMap<String, f64>) -> String {
    let mut s = String::new();
    for (k, v) in values {
        let _ = writeln!(s, "{k} = {v:e}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memelement::Polynomial;

    fn spec() -> NetlistSpec<f64> {
        NetlistSpec::with_default_base(MmoParams::demo())
    }

    #[test]
    fn r2_example_and_identities() {
        let cv = component_values(&spec()).unwrap();
        assert_eq!(cv.r2, 1e4);
        assert_eq!(cv.c1, 1e-5);
        let p = MmoParams::<f64> { eta: 1.0, epsilon: 1.0, ..MmoParams::demo() };
        let cv = component_values(&NetlistSpec::with_default_base(p)).unwrap();
        assert!((cv.r1 - 1e4).abs() < 1e-9);
        assert_eq!(cv.r2, 1e5);
    }

    #[test]
    fn formula_errors() {
        let mut s = spec();
        s.params.g = Polynomial::new(vec![-0.1, 0.0, 0.0]);
        assert!(matches!(component_values(&s), Err(Error::MultiplierUndefined)));
        let mut s = spec();
        s.params.k = 0.0;
        assert!(matches!(component_values(&s), Err(Error::R7Undefined)));
        let mut s = spec();
        s.params.g = Polynomial::new(vec![0.1, 0.2, 0.3]);
        assert!(matches!(component_values(&s), Err(Error::InvalidParameter(_))));
        let s = NetlistSpec::new(MmoParams::demo(), 1e5, 1e-6);
        assert!(component_values(&s).is_err());
    }

    #[test]
    fn deck_round_trip() {
        let s = spec();
        let deck = emit_netlist(&s).unwrap();
        assert!(!deck.contains('\r'));
        let parsed = parse_netlist(&deck).unwrap();
        assert_eq!(parsed.component_map().unwrap(), component_values(&s).unwrap().to_map());
        let mults = parsed.elements.iter().filter(|e| e.model.as_deref() == Some("MULT")).count();
        assert_eq!(mults, 2);
        assert_eq!(parsed.subcircuits["MULT"].ports.len(), 4);
        let (_, stop) = parsed.tran.unwrap();
        assert!(stop >= 5.0 * 2.0 * PI);
    }

    #[test]
    fn zero_bias_source() {
        let mut s = spec();
        s.params.a_s = 0.0;
        let parsed = parse_netlist(&emit_netlist(&s).unwrap()).unwrap();
        assert_eq!(parsed.element("VAS").unwrap().value, Some(0.0));
    }

    #[test]
    fn values_with_suffixes() {
        assert_eq!(parse_value("10k"), Some(1e4));
        assert_eq!(parse_value("3meg"), Some(3e6));
        assert!((parse_value("10uF").unwrap() - 1e-5).abs() < 1e-20);
        assert_eq!(parse_value("1e-5F"), Some(1e-5 * 1e-15));
        assert_eq!(parse_value("2.5"), Some(2.5));
        assert_eq!(parse_value("-4m"), Some(-4e-3));
        assert_eq!(parse_value("1e"), Some(1.0));
        assert_eq!(parse_value("k"), None);
    }

    #[test]
    fn parser_diagnostics() {
        let missing_end = "title\nR1 a b 1k\n";
        assert!(matches!(parse_netlist(missing_end), Err(Error::NetlistParse { line: 2, .. })));
        let bad_value = "title\nR1 a b 1k\nC1 a 0 zz\n.end\n";
        assert!(matches!(parse_netlist(bad_value), Err(Error::NetlistParse { line: 3, .. })));
        let unknown = "title\nX1 a b FOO\n.end\n";
        assert!(matches!(parse_netlist(unknown), Err(Error::NetlistParse { line: 2, .. })));
        let cont = "title\nR1 a b\n+ 2k\n.end\n";
        assert_eq!(parse_netlist(cont).unwrap().element("R1").unwrap().value, Some(2e3));
    }
}
