use std::fmt::Write as _;
use std::str::FromStr;

use crate::cones::{BlockKind, ConeBlock, ConeSpec};
use crate::instance::{
    CertificateBundle, DualInfeasibleWitness, DualInstance, Instance, PrimalInstance, PrimalNotStrongWitness, SeqForm,
    SeqWitness, VectorDual, VectorPrimal,
};
use crate::io::{NativeDocument, ParseError};
use crate::linalg::{Rat, RatMatrix, SymRatMatrix};

pub const FORMAT_LINE: &str = "format frcert-native 1";

fn join(xs: &[Rat]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn usizes(xs: &[usize]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn matrix_line(out: &mut String, label: &str, m: &RatMatrix) {
    let _ = writeln!(out, "{label} {} {} : {}", m.rows(), m.cols(), join(m.entries()));
}

fn seq_section(out: &mut String, kind: &str, w: &SeqWitness) {
    let _ = writeln!(out, "certificate {kind}");
    let _ = writeln!(out, "form {}", w.form.name());
    let _ = writeln!(out, "sizes {}", usizes(&w.sizes));
    matrix_line(out, "s", &w.s);
    for (i, y) in w.ys.iter().enumerate() {
        let _ = writeln!(out, "y {i} : {}", join(y.upper()));
    }
    out.push_str("end\n");
}

fn vector_rows(out: &mut String, a: &[Vec<Rat>]) {
    for (i, ai) in a.iter().enumerate() {
        let _ = writeln!(out, "a {i} : {}", join(ai));
    }
}

pub fn write_native(doc: &NativeDocument) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_LINE);
    out.push('\n');
    if let Some(inst) = &doc.instance {
        let _ = writeln!(out, "instance {}", inst.kind());
        match inst {
            Instance::Dual(d) => {
                let _ = writeln!(out, "n {}\nm {}", d.n, d.m());
                for (i, a) in d.a.iter().enumerate() {
                    let _ = writeln!(out, "a {i} : {}", join(a.upper()));
                }
                let _ = writeln!(out, "c : {}", join(&d.c));
                let _ = writeln!(out, "objective : {}", join(d.objective.upper()));
            }
            Instance::Primal(p) => {
                let _ = writeln!(out, "n {}\nm {}", p.n, p.m());
                for (i, a) in p.a.iter().enumerate() {
                    let _ = writeln!(out, "a {i} : {}", join(a.upper()));
                }
                let _ = writeln!(out, "b : {}", join(p.b.upper()));
                let _ = writeln!(out, "c : {}", join(&p.c));
            }
            Instance::VectorDual(v) => {
                let _ = writeln!(out, "cone {}\nm {}", v.cone, v.m());
                vector_rows(&mut out, &v.a);
                let _ = writeln!(out, "c : {}", join(&v.c));
            }
            Instance::VectorPrimal(v) => {
                let _ = writeln!(out, "cone {}\nm {}", v.cone, v.m());
                vector_rows(&mut out, &v.a);
                let _ = writeln!(out, "b : {}", join(&v.b));
            }
        }
    }
    for (k, v) in &doc.bundle.provenance.entries {
        let _ = writeln!(out, "provenance {k} {v}");
    }
    if let Some(w) = &doc.bundle.dual_infeasible {
        out.push_str("certificate dual-infeasible\n");
        let _ = writeln!(out, "sizes {}", usizes(&w.sizes));
        matrix_line(&mut out, "M", &w.m);
        matrix_line(&mut out, "t", &w.t);
        out.push_str("end\n");
    }
    if let Some(w) = &doc.bundle.dual_not_strong {
        seq_section(&mut out, "dual-not-strong", w);
    }
    if let Some(w) = &doc.bundle.primal_infeasible {
        seq_section(&mut out, "primal-infeasible", w);
    }
    if let Some(w) = &doc.bundle.primal_not_strong {
        out.push_str("certificate primal-not-strong\n");
        let _ = writeln!(out, "sizes {}", usizes(&w.sizes));
        matrix_line(&mut out, "M", &w.m);
        let _ = writeln!(out, "mu : {}", join(&w.mu));
        matrix_line(&mut out, "t", &w.t);
        out.push_str("end\n");
    }
    out
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column, msg)
    }

    fn number<T: FromStr>(&self, what: &str) -> Result<T, ParseError> {
        self.text.parse().map_err(|_| self.err(format!("expected {what}, found '{}'", self.text)))
    }

    fn rational(&self) -> Result<Rat, ParseError> {
        self.number("a rational p/q")
    }
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    end_column: usize,
}

impl<'a> Line<'a> {
    fn head(&self) -> &'a str {
        self.tokens[0].text
    }

    fn at(&self, i: usize, what: &str) -> Result<Token<'a>, ParseError> {
        self.tokens
            .get(i)
            .copied()
            .ok_or_else(|| ParseError::new(self.number, self.end_column, format!("missing {what}")))
    }

    fn expect_len(&self, n: usize) -> Result<(), ParseError> {
        match self.tokens.get(n) {
            Some(t) => Err(t.err(format!("unexpected token '{}'", t.text))),
            None if self.tokens.len() < n => Err(ParseError::new(self.number, self.end_column, "line is too short")),
            None => Ok(()),
        }
    }

    // tokens after the ':' separator, which must sit at position `colon`
    fn values(&self, colon: usize) -> Result<&[Token<'a>], ParseError> {
        let sep = self.at(colon, "':'")?;
        if sep.text != ":" {
            return Err(sep.err(format!("expected ':', found '{}'", sep.text)));
        }
        Ok(&self.tokens[colon + 1..])
    }

    fn rationals(&self, colon: usize, expected: usize) -> Result<Vec<Rat>, ParseError> {
        let vals = self.values(colon)?;
        if vals.len() != expected {
            let col = vals.get(expected).map_or(self.end_column, |t| t.column);
            return Err(ParseError::new(self.number, col, format!("expected {expected} values, found {}", vals.len())));
        }
        vals.iter().map(Token::rational).collect()
    }
}

fn lex(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<Token> = body
            .split_ascii_whitespace()
            .map(|t| Token { text: t, line: i + 1, column: t.as_ptr() as usize - raw.as_ptr() as usize + 1 })
            .collect();
        if !tokens.is_empty() {
            out.push(Line { number: i + 1, tokens, end_column: body.len() + 1 });
        }
    }
    out
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<&Line<'a>, ParseError> {
        let line = self.lines.get(self.pos).ok_or_else(|| {
            ParseError::new(self.last_line + 1, 1, format!("unexpected end of input, expected {what}"))
        })?;
        self.pos += 1;
        Ok(line)
    }

    fn keyword(&mut self, kw: &str) -> Result<&Line<'a>, ParseError> {
        let line = self.next(&format!("'{kw}'"))?;
        if line.head() != kw {
            return Err(line.tokens[0].err(format!("expected '{kw}', found '{}'", line.head())));
        }
        Ok(line)
    }

    fn count(&mut self, kw: &str) -> Result<usize, ParseError> {
        let line = self.keyword(kw)?;
        line.expect_len(2)?;
        line.at(1, "a count")?.number("a count")
    }

    fn sizes(&mut self) -> Result<Vec<usize>, ParseError> {
        let line = self.keyword("sizes")?;
        line.tokens[1..].iter().map(|t| t.number("a block size")).collect()
    }

    fn matrix(&mut self, kw: &str) -> Result<RatMatrix, ParseError> {
        let line = self.keyword(kw)?;
        let rows: usize = line.at(1, "row count")?.number("row count")?;
        let cols: usize = line.at(2, "column count")?.number("column count")?;
        let vals = line.rationals(3, rows * cols)?;
        RatMatrix::new(rows, cols, vals).map_err(|e| line.tokens[0].err(e.to_string()))
    }

    fn indexed_rows(&mut self, kw: &str, count: usize, width: usize) -> Result<Vec<Vec<Rat>>, ParseError> {
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let line = self.keyword(kw)?;
            let idx = line.at(1, "an index")?;
            if idx.number::<usize>("an index")? != i {
                return Err(idx.err(format!("expected index {i}")));
            }
            out.push(line.rationals(2, width)?);
        }
        Ok(out)
    }

    fn vector(&mut self, kw: &str, width: usize) -> Result<Vec<Rat>, ParseError> {
        let line = self.keyword(kw)?;
        line.rationals(1, width)
    }

    fn end(&mut self) -> Result<(), ParseError> {
        let line = self.keyword("end")?;
        line.expect_len(1)
    }
}

fn tri(n: usize) -> usize {
    n * (n + 1) / 2
}

fn sym_rows(rows: Vec<Vec<Rat>>, n: usize) -> Vec<SymRatMatrix> {
    rows.into_iter().map(|r| SymRatMatrix::from_upper(n, r).expect("length checked")).collect()
}

fn parse_cone(line: &Line<'_>) -> Result<ConeSpec, ParseError> {
    let mut blocks = Vec::new();
    for t in &line.tokens[1..] {
        let (kind, dim) = t.text.split_once(':').ok_or_else(|| t.err("expected kind:dim"))?;
        let kind: BlockKind = kind.parse().map_err(|e: String| t.err(e))?;
        let dim: usize = dim.parse().map_err(|_| t.err(format!("bad block dimension '{dim}'")))?;
        blocks.push(ConeBlock { kind, dim });
    }
    ConeSpec::new(blocks).map_err(|e| line.tokens[0].err(e.to_string()))
}

fn parse_instance(p: &mut Parser<'_>, kind: Token<'_>) -> Result<Instance, ParseError> {
    let wrap = |e: crate::instance::InstanceError| kind.err(e.to_string());
    match kind.text {
        "dual-sdp" | "primal-sdp" => {
            let n = p.count("n")?;
            let m = p.count("m")?;
            let a = sym_rows(p.indexed_rows("a", m, tri(n))?, n);
            if kind.text == "dual-sdp" {
                let c = p.vector("c", m)?;
                let obj = SymRatMatrix::from_upper(n, p.vector("objective", tri(n))?).expect("length checked");
                Ok(Instance::Dual(DualInstance::with_objective(a, c, obj).map_err(wrap)?))
            } else {
                let b = SymRatMatrix::from_upper(n, p.vector("b", tri(n))?).expect("length checked");
                let c = p.vector("c", m)?;
                Ok(Instance::Primal(PrimalInstance::with_objective(a, b, c).map_err(wrap)?))
            }
        }
        "dual-vector" | "primal-vector" => {
            let cone = parse_cone(p.keyword("cone")?)?;
            let m = p.count("m")?;
            let d = cone.ambient_dim();
            let a = p.indexed_rows("a", m, d)?;
            if kind.text == "dual-vector" {
                let c = p.vector("c", m)?;
                Ok(Instance::VectorDual(VectorDual::new(a, c, cone).map_err(wrap)?))
            } else {
                let b = p.vector("b", d)?;
                Ok(Instance::VectorPrimal(VectorPrimal::new(a, b, cone).map_err(wrap)?))
            }
        }
        other => Err(kind.err(format!("unknown instance kind '{other}'"))),
    }
}

fn parse_seq(p: &mut Parser<'_>) -> Result<SeqWitness, ParseError> {
    let line = p.keyword("form")?;
    let t = line.at(1, "a sequence form")?;
    let form = SeqForm::parse(t.text).ok_or_else(|| t.err(format!("unknown sequence form '{}'", t.text)))?;
    let sizes = p.sizes()?;
    let s = p.matrix("s")?;
    let n = s.rows();
    let mut ys = Vec::new();
    while p.peek().is_some_and(|l| l.head() == "y") {
        let line = p.next("y")?;
        let idx = line.at(1, "an index")?;
        if idx.number::<usize>("an index")? != ys.len() {
            return Err(idx.err(format!("expected index {}", ys.len())));
        }
        ys.push(SymRatMatrix::from_upper(n, line.rationals(2, tri(n))?).expect("length checked"));
    }
    p.end()?;
    Ok(SeqWitness { ys, s, sizes, form })
}

pub fn read_native(text: &str) -> Result<NativeDocument, ParseError> {
    let lines = lex(text);
    let last_line = text.lines().count();
    let mut p = Parser { lines, pos: 0, last_line };
    let first = p.next("the format line")?;
    let got: Vec<&str> = first.tokens.iter().map(|t| t.text).collect();
    if got.join(" ") != FORMAT_LINE {
        return Err(first.tokens[0].err(format!("expected '{FORMAT_LINE}'")));
    }
    let mut doc = NativeDocument::default();
    let mut bundle = CertificateBundle::default();
    while let Some(line) = p.peek() {
        let head = line.tokens[0];
        match head.text {
            "instance" if doc.instance.is_none() => {
                let line = p.next("instance")?;
                line.expect_len(2)?;
                let kind = line.at(1, "an instance kind")?;
                doc.instance = Some(parse_instance(&mut p, kind)?);
            }
            "provenance" => {
                let line = p.next("provenance")?;
                let key = line.at(1, "a key")?.text;
                let value: Vec<&str> = line.tokens[2..].iter().map(|t| t.text).collect();
                bundle.provenance.insert(key, value.join(" "));
            }
            "certificate" => {
                let line = p.next("certificate")?;
                line.expect_len(2)?;
                let kind = line.at(1, "a certificate kind")?;
                let dup = || kind.err(format!("duplicate certificate '{}'", kind.text));
                match kind.text {
                    "dual-infeasible" => {
                        let sizes = p.sizes()?;
                        let m = p.matrix("M")?;
                        let t = p.matrix("t")?;
                        p.end()?;
                        if bundle.dual_infeasible.replace(DualInfeasibleWitness { m, t, sizes }).is_some() {
                            return Err(dup());
                        }
                    }
                    "dual-not-strong" => {
                        if bundle.dual_not_strong.replace(parse_seq(&mut p)?).is_some() {
                            return Err(dup());
                        }
                    }
                    "primal-infeasible" => {
                        if bundle.primal_infeasible.replace(parse_seq(&mut p)?).is_some() {
                            return Err(dup());
                        }
                    }
                    "primal-not-strong" => {
                        let sizes = p.sizes()?;
                        let m = p.matrix("M")?;
                        let mu = p.vector("mu", m.rows())?;
                        let t = p.matrix("t")?;
                        p.end()?;
                        if bundle.primal_not_strong.replace(PrimalNotStrongWitness { m, mu, t, sizes }).is_some() {
                            return Err(dup());
                        }
                    }
                    other => return Err(kind.err(format!("unknown certificate kind '{other}'"))),
                }
            }
            other => return Err(head.err(format!("unexpected '{other}'"))),
        }
    }
    doc.bundle = bundle;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::generator::{gen_weak, GenParams};

    fn round_trip(doc: &NativeDocument) {
        let text = write_native(doc);
        assert_eq!(&read_native(&text).unwrap(), doc, "{text}");
    }

    #[test]
    fn fixtures_round_trip() {
        round_trip(&NativeDocument::new(Instance::Dual(fixtures::two_by_two(0)), fixtures::two_by_two_bundle()));
        round_trip(&NativeDocument::new(Instance::Dual(fixtures::row_operations()), fixtures::row_operations_bundle()));
        round_trip(&NativeDocument::new(Instance::Primal(fixtures::primal_three()), fixtures::primal_three_bundle()));
        round_trip(&NativeDocument::new(Instance::Primal(fixtures::ramana_example()), CertificateBundle::default()));
    }

    #[test]
    fn vector_and_sidecar_round_trip() {
        let v = VectorDual::new(
            vec![vec![Rat::new(1.into(), 3.into()), Rat::from_integer((-2).into())]],
            vec![Rat::from_integer(5.into())],
            ConeSpec::new(vec![
                ConeBlock { kind: BlockKind::Orthant, dim: 1 },
                ConeBlock { kind: BlockKind::Zero, dim: 1 },
            ])
            .unwrap(),
        )
        .unwrap();
        round_trip(&NativeDocument::new(Instance::VectorDual(v), CertificateBundle::default()));
        let sidecar = NativeDocument { instance: None, bundle: fixtures::two_by_two_bundle() };
        round_trip(&sidecar);
    }

    #[test]
    fn generated_round_trip() {
        for seed in 0..20 {
            let mut p = GenParams::preset("m10").unwrap().with_seed(seed);
            p.mess = seed % 2 == 1;
            let (inst, bundle) = gen_weak(&p).unwrap();
            round_trip(&NativeDocument::new(Instance::Dual(inst), bundle));
        }
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# header\nformat frcert-native 1\n\ninstance dual-sdp # kind\nn 1\nm 1\na 0 : 2\nc : -1/2\nobjective : 1\n";
        let doc = read_native(text).unwrap();
        match doc.instance.unwrap() {
            Instance::Dual(d) => assert_eq!(d.c[0], Rat::new((-1).into(), 2.into())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_positions() {
        let text = "format frcert-native 1\ninstance dual-sdp\nn 1\nm 1\na 0 : x\n";
        let e = read_native(text).unwrap_err();
        assert_eq!((e.line, e.column), (5, 7));
        let e = read_native("format frcert-native 1\ninstance dual-sdp\nn 2\nm 1\na 0 : 1 2\n").unwrap_err();
        assert_eq!(e.line, 5);
        assert!(e.message.contains("expected 3 values"));
        let e = read_native("format other\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = read_native("format frcert-native 1\ninstance dual-sdp\nn 1\n").unwrap_err();
        assert_eq!(e.line, 4);
    }
}
