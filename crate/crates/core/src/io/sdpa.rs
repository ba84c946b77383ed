use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};

use crate::instance::DualInstance;
use crate::io::ParseError;
use crate::linalg::{rat_to_f64, Rat, SymRatMatrix};
use crate::reduction::ramana::LmiProgram;

pub const LOSSY_FLAG: &str = "\"lossy: some values are rounded to 17 significant digits";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdpaText {
    pub text: String,
    pub lossy: bool,
}

// Shortest exact decimal when the denominator is 2^a 5^b.
pub fn exact_decimal(x: &Rat) -> Option<String> {
    let mut d = x.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut a, mut b) = (0u32, 0u32);
    while d.is_even() {
        d /= &two;
        a += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        b += 1;
    }
    if !d.is_one() {
        return None;
    }
    let e = a.max(b);
    if e == 0 {
        return Some(x.numer().to_string());
    }
    let scaled = x.numer() * Pow::pow(&BigInt::from(10), e) / x.denom();
    let digits = scaled.abs().to_string();
    let e = e as usize;
    let padded = if digits.len() <= e { format!("{}{digits}", "0".repeat(e + 1 - digits.len())) } else { digits };
    let (int, frac) = padded.split_at(padded.len() - e);
    let sign = if x.is_negative() { "-" } else { "" };
    Some(format!("{sign}{int}.{}", frac.trim_end_matches('0')))
}

fn format_value(x: &Rat, lossy: &mut bool) -> String {
    exact_decimal(x).unwrap_or_else(|| {
        *lossy = true;
        format!("{:.16e}", rat_to_f64(x))
    })
}

pub fn parse_decimal(s: &str) -> Option<Rat> {
    if let Some((p, q)) = s.split_once('/') {
        let (p, q): (BigInt, BigInt) = (p.parse().ok()?, q.parse().ok()?);
        return (!q.is_zero()).then(|| Rat::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}0").parse::<BigInt>().ok()? / 10;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if shift >= 0 {
        Rat::from_integer(digits * Pow::pow(&ten, shift as u32))
    } else {
        Rat::new(digits, Pow::pow(&ten, (-shift) as u32))
    };
    if neg {
        v = -v;
    }
    Some(v)
}

// The dual instance becomes the SDPA dual: max F_0 . Y with F_i . Y = c_i, so
// F_0 = -objective and F_i = a_i.
pub fn export_sdpa(inst: &DualInstance) -> SdpaText {
    let mut lossy = false;
    let mut body = String::new();
    let n = inst.n;
    let _ = writeln!(body, "{} =mDIM\n1 =nBLOCK\n{n} =bLOCKsTRUCT", inst.m());
    let c: Vec<String> = inst.c.iter().map(|x| format_value(x, &mut lossy)).collect();
    let _ = writeln!(body, "{}", c.join(" "));
    let mut write_matrix = |idx: usize, mat: &SymRatMatrix, sign: i64| {
        for r in 0..n {
            for col in r..n {
                let v = mat.get(r, col);
                if !v.is_zero() {
                    let v = v * Rat::from_integer(sign.into());
                    let _ = writeln!(body, "{idx} 1 {} {} {}", r + 1, col + 1, format_value(&v, &mut lossy));
                }
            }
        }
    };
    write_matrix(0, &inst.objective, -1);
    for (i, a) in inst.a.iter().enumerate() {
        write_matrix(i + 1, a, 1);
    }
    let mut text = format!("\"frcert dual instance, n = {n}, m = {}\n", inst.m());
    if lossy {
        text.push_str(LOSSY_FLAG);
        text.push('\n');
    }
    text.push_str(&body);
    SdpaText { text, lossy }
}

// SDPA primal form: minimize objective . z with sum F_i z_i - F_0 psd. The
// equalities become a diagonal block holding each one twice with opposite signs.
pub fn export_lmi(program: &LmiProgram) -> SdpaText {
    let mut lossy = false;
    let nv = program.nvars();
    let mut body = String::new();
    let neq = program.equalities.len();
    let mut structure: Vec<String> = program.blocks.iter().map(|b| b.size.to_string()).collect();
    if neq > 0 {
        structure.push(format!("-{}", 2 * neq));
    }
    let _ = writeln!(body, "{nv} =mDIM\n{} =nBLOCK\n{} =bLOCKsTRUCT", structure.len(), structure.join(" "));
    let mut obj = vec![Rat::zero(); nv];
    for (v, c) in &program.objective {
        obj[*v] += c;
    }
    let obj: Vec<String> = obj.iter().map(|x| format_value(x, &mut lossy)).collect();
    let _ = writeln!(body, "{}", obj.join(" "));
    for (bi, block) in program.blocks.iter().enumerate() {
        for e in &block.entries {
            let (idx, v) = match e.var {
                Some(v) => (v + 1, e.value.clone()),
                None => (0, -e.value.clone()),
            };
            let _ = writeln!(body, "{idx} {} {} {} {}", bi + 1, e.row + 1, e.col + 1, format_value(&v, &mut lossy));
        }
    }
    let eb = program.blocks.len() + 1;
    for (i, eq) in program.equalities.iter().enumerate() {
        for (sign, pos) in [(1i64, 2 * i + 1), (-1, 2 * i + 2)] {
            let s = Rat::from_integer(sign.into());
            if !eq.rhs.is_zero() {
                let _ = writeln!(body, "0 {eb} {pos} {pos} {}", format_value(&(&eq.rhs * &s), &mut lossy));
            }
            for (v, c) in &eq.coeffs {
                let _ = writeln!(body, "{} {eb} {pos} {pos} {}", v + 1, format_value(&(c * &s), &mut lossy));
            }
        }
    }
    let mut text = format!("\"frcert linear matrix inequality program, {nv} variables\n");
    if lossy {
        text.push_str(LOSSY_FLAG);
        text.push('\n');
    }
    text.push_str(&body);
    SdpaText { text, lossy }
}

struct Tok<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Tok<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column, msg)
    }

    fn int(&self, what: &str) -> Result<i64, ParseError> {
        self.text.parse().map_err(|_| self.err(format!("expected {what}, found '{}'", self.text)))
    }

    fn value(&self) -> Result<Rat, ParseError> {
        parse_decimal(self.text).ok_or_else(|| self.err(format!("expected a number, found '{}'", self.text)))
    }
}

// Data lines with punctuation turned into separators, comments dropped.
fn data_lines(text: &str) -> Vec<Vec<Tok<'_>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('"') || trimmed.starts_with('*') {
            continue;
        }
        let toks: Vec<Tok> = raw
            .split(|c: char| c.is_whitespace() || matches!(c, '{' | '}' | '(' | ')' | ','))
            .filter(|t| !t.is_empty())
            .map(|t| Tok { text: t, line: i + 1, column: t.as_ptr() as usize - raw.as_ptr() as usize + 1 })
            .collect();
        if !toks.is_empty() {
            out.push(toks);
        }
    }
    out
}

pub fn import_sdpa(text: &str) -> Result<DualInstance, ParseError> {
    let lines = data_lines(text);
    let eof = || ParseError::new(text.lines().count() + 1, 1, "unexpected end of input");
    let mut it = lines.iter();
    let head = it.next().ok_or_else(eof)?;
    let m = head[0].int("the constraint count")?;
    let nb_line = it.next().ok_or_else(eof)?;
    let nblocks = nb_line[0].int("the block count")?;
    if nblocks != 1 {
        return Err(nb_line[0].err(format!("only a single psd block is supported, found {nblocks} blocks")));
    }
    let bs_line = it.next().ok_or_else(eof)?;
    let n = bs_line[0].int("the block size")?;
    if n <= 0 {
        return Err(bs_line[0].err("the block must be a positive psd block"));
    }
    let (m, n) = (usize::try_from(m).map_err(|_| head[0].err("negative constraint count"))?, n as usize);
    let mut rest = it.flat_map(|l| l.iter());
    let mut c = Vec::with_capacity(m);
    for _ in 0..m {
        c.push(rest.next().ok_or_else(eof)?.value()?);
    }
    let mut mats = vec![SymRatMatrix::zeros(n); m + 1];
    let toks: Vec<&Tok> = rest.collect();
    let chunks = toks.chunks(5);
    for chunk in chunks {
        if chunk.len() < 5 {
            return Err(chunk[0].err("incomplete entry: expected matrix, block, row, column, value"));
        }
        let idx = chunk[0].int("a matrix index")?;
        if idx < 0 || idx as usize > m {
            return Err(chunk[0].err(format!("matrix index {idx} out of range 0..={m}")));
        }
        let block = chunk[1].int("a block index")?;
        if block != 1 {
            return Err(chunk[1].err(format!("block index {block} out of range 1..=1")));
        }
        let mut pos = [0usize; 2];
        for (p, t) in pos.iter_mut().zip(&chunk[2..4]) {
            let v = t.int("a row or column")?;
            if v < 1 || v as usize > n {
                return Err(t.err(format!("index {v} out of range 1..={n}")));
            }
            *p = v as usize - 1;
        }
        let v = chunk[4].value()?;
        let mat = &mut mats[idx as usize];
        let cur = mat.get(pos[0], pos[1]) + v;
        mat.set(pos[0], pos[1], cur);
    }
    let objective = mats[0].scale(&Rat::from_integer((-1).into()));
    let a = mats.split_off(1);
    DualInstance::with_objective(a, c, objective).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::generator::{gen_weak, GenParams};
    use crate::linalg::{rat, ratq};

    #[test]
    fn decimals_are_exact() {
        assert_eq!(exact_decimal(&ratq(1, 4)).unwrap(), "0.25");
        assert_eq!(exact_decimal(&ratq(-3, 2)).unwrap(), "-1.5");
        assert_eq!(exact_decimal(&ratq(-1, 80)).unwrap(), "-0.0125");
        assert_eq!(exact_decimal(&rat(7)).unwrap(), "7");
        assert_eq!(exact_decimal(&ratq(1, 3)), None);
        for s in ["0.25", "-1.5", "-0.0125", "7", "1e3", "2.5E-2", ".5", "+4."] {
            let v = parse_decimal(s).unwrap();
            assert_eq!(v, parse_decimal(&exact_decimal(&v).unwrap()).unwrap(), "{s}");
        }
        assert_eq!(parse_decimal("2.5E-2").unwrap(), ratq(1, 40));
        assert_eq!(parse_decimal("1/3").unwrap(), ratq(1, 3));
        assert!(parse_decimal("abc").is_none() && parse_decimal("").is_none() && parse_decimal("-").is_none());
    }

    #[test]
    fn two_by_two_exports() {
        let out = export_sdpa(&fixtures::two_by_two(0));
        assert!(!out.lossy);
        assert!(out.text.contains("2 =mDIM\n1 =nBLOCK\n2 =bLOCKsTRUCT\n0 -1\n"));
        assert_eq!(import_sdpa(&out.text).unwrap(), fixtures::two_by_two(0));
    }

    #[test]
    fn lossy_values_are_flagged() {
        let inst = DualInstance::new(vec![SymRatMatrix::identity(1)], vec![ratq(1, 3)]).unwrap();
        let out = export_sdpa(&inst);
        assert!(out.lossy && out.text.contains(LOSSY_FLAG));
        let back = import_sdpa(&out.text).unwrap();
        assert!((rat_to_f64(&back.c[0]) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn generated_instances_round_trip() {
        for seed in 0..10 {
            let mut p = GenParams::preset("m20").unwrap().with_seed(seed);
            p.mess = true;
            let (inst, _) = gen_weak(&p).unwrap();
            let out = export_sdpa(&inst);
            assert!(!out.lossy);
            assert_eq!(import_sdpa(&out.text).unwrap(), inst);
        }
    }

    #[test]
    fn hand_written_file_with_comments() {
        let text = "\"a comment\n* another\n1\n1\n1\n{2.5}\n0 1 1 1 -1\n1 1 1 1 1\n";
        let inst = import_sdpa(text).unwrap();
        assert_eq!(inst.c, vec![ratq(5, 2)]);
        assert_eq!(inst.objective, SymRatMatrix::identity(1));
        let spaced = "  \"x\n1 =mDIM\n\n1\n  1\n2.5\n0 1 1 1 -1   1 1 1 1 1\n";
        assert_eq!(import_sdpa(spaced).unwrap(), inst);
    }

    #[test]
    fn malformed_files_rejected() {
        assert!(import_sdpa("").is_err());
        let e = import_sdpa("1\n2\n1 1\n0\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = import_sdpa("1\n1\n2\n0\n1 2 1 1 1\n").unwrap_err();
        assert!(e.message.contains("block index"));
        let e = import_sdpa("1\n1\n2\n0\n3 1 1 1 1\n").unwrap_err();
        assert!(e.message.contains("matrix index"));
        let e = import_sdpa("1\n1\n2\n0\n1 1 3 1 1\n").unwrap_err();
        assert_eq!((e.line, e.column), (5, 5));
    }

    #[test]
    fn lmi_export_has_equality_block() {
        let rd = crate::reduction::ramana::build_ramana_dual(&fixtures::ramana_example(), 2).unwrap();
        let out = export_lmi(&rd.program);
        let nv = rd.program.nvars();
        assert!(out.text.contains(&format!("{nv} =mDIM")));
        assert!(out.text.contains("6 =nBLOCK"));
        assert!(out.text.contains("3 3 3 6 6 -16 =bLOCKsTRUCT"));
    }
}
