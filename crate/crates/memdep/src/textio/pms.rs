//! The membrane-system format.
//!
//! ```text
//! @objects a b yes no
//! @labels skin h
//! @structure [env [skin [h]]]
//! @contents h: a a
//! @input h
//! @rules
//! [a -> b b]_h
//! [b]_h -> []_h yes
//! ```
//!
//! `@contents h:` fills every membrane labelled `h`; `@contents h#2:` only
//! the second one in depth-first order. `@yes` and `@no` rename the
//! distinguished objects.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use memdep_core::system::{is_label_token, is_object_token};
use memdep_core::{validate_system, LabelId, Location, Membrane, MembraneSystem, Multiset, ObjectId, Rule};

use super::lex::{lex, Cursor, Line, Tok};
use super::{ErrorCode, LocatedError, ParseError, SourceSpan};

/// Where each part of a parsed system came from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SystemSpans {
    pub objects: Option<SourceSpan>,
    pub labels: Option<SourceSpan>,
    pub structure: Option<SourceSpan>,
    pub contents: BTreeMap<LabelId, SourceSpan>,
    pub input: Option<SourceSpan>,
    pub distinguished: Option<SourceSpan>,
    pub rules: Vec<SourceSpan>,
}

impl SystemSpans {
    fn locate(&self, loc: &Location) -> SourceSpan {
        let found = match loc {
            Location::Alphabet => self.objects,
            Location::Labels => self.labels,
            Location::Structure => self.structure,
            Location::Contents(h) => self.contents.get(h).copied().or(self.structure),
            Location::Rule(i) => self.rules.get(*i).copied(),
            Location::Input => self.input,
            Location::Distinguished => self.distinguished.or(self.objects),
        };
        found.unwrap_or_else(SourceSpan::start)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Objects,
    Labels,
    Structure,
    Contents,
    Rules,
}

struct ContentsEntry {
    label: String,
    occurrence: Option<usize>,
    items: Multiset,
    span: SourceSpan,
}

/// Parses and validates. Every validation error fails the parse, located
/// at the part of the file it concerns.
pub fn parse_system(text: &str) -> Result<MembraneSystem, ParseError> {
    let (sys, spans) = parse_system_unvalidated(text)?;
    let report = validate_system(&sys);
    if report.is_ok() {
        return Ok(sys);
    }
    let mut errors: Vec<LocatedError> = report
        .errors
        .iter()
        .map(|issue| LocatedError {
            code: ErrorCode::Invalid(issue.code),
            message: format!("{}: {}", issue.location, issue.message),
            span: spans.locate(&issue.location),
        })
        .collect();
    errors.sort_by_key(|e| e.span);
    Err(ParseError { errors })
}

/// Parses without validating the result.
pub fn parse_system_unvalidated(text: &str) -> Result<(MembraneSystem, SystemSpans), ParseError> {
    let lines = lex(text)?;
    let mut sys = MembraneSystem::empty();
    sys.alphabet.clear();
    let mut spans = SystemSpans::default();
    let mut section = Section::None;
    let mut structure_lines: Vec<(&Line, usize)> = Vec::new();
    let mut contents: Vec<ContentsEntry> = Vec::new();
    let mut seen: BTreeMap<String, SourceSpan> = BTreeMap::new();

    for line in &lines {
        let mut start = 0;
        if let Some((name, span)) = line.directive() {
            start = 1;
            let once = matches!(name, "structure" | "input" | "yes" | "no");
            if once {
                if let Some(prev) = seen.get(name) {
                    return Err(ParseError::syntax(
                        span,
                        format!("second @{name} section (first at {prev})"),
                    ));
                }
            }
            seen.insert(name.to_string(), span);
            section = match name {
                "objects" => {
                    spans.objects.get_or_insert(span);
                    Section::Objects
                }
                "labels" => {
                    spans.labels.get_or_insert(span);
                    Section::Labels
                }
                "structure" => {
                    spans.structure = Some(span);
                    Section::Structure
                }
                "contents" => {
                    let mut cur = Cursor::new(line, 1);
                    contents.push(contents_header(&mut cur)?);
                    start = line.tokens.len() - remaining(&cur);
                    Section::Contents
                }
                "rules" => Section::Rules,
                "input" | "yes" | "no" => {
                    let mut cur = Cursor::new(line, 1);
                    let (w, wspan) = cur.word("a name")?;
                    cur.end()?;
                    match name {
                        "input" => {
                            spans.input = Some(wspan);
                            sys.input_label = Some(LabelId::new(w));
                        }
                        "yes" => {
                            spans.distinguished.get_or_insert(wspan);
                            sys.yes = ObjectId::new(w);
                        }
                        _ => {
                            spans.distinguished.get_or_insert(wspan);
                            sys.no = ObjectId::new(w);
                        }
                    }
                    start = line.tokens.len();
                    Section::None
                }
                other => return Err(ParseError::syntax(span, format!("unknown section @{other}"))),
            };
            if start >= line.tokens.len() {
                continue;
            }
        }

        let mut cur = Cursor::new(line, start);
        match section {
            Section::None => {
                return Err(ParseError::syntax(cur.span(), "content outside any section"));
            }
            Section::Objects => {
                while !cur.at_end() {
                    let (w, span) = cur.word("an object name")?;
                    if w.starts_with('@') || !is_object_token(w) {
                        return Err(ParseError::syntax(span, format!("bad object name `{w}`")));
                    }
                    sys.alphabet.insert(ObjectId::new(w));
                }
            }
            Section::Labels => {
                while !cur.at_end() {
                    let (w, span) = cur.word("a label")?;
                    if !is_label_token(w) {
                        return Err(ParseError::syntax(span, format!("bad label `{w}`")));
                    }
                    sys.labels.insert(LabelId::new(w));
                }
            }
            Section::Structure => structure_lines.push((line, start)),
            Section::Contents => {
                let entry = contents.last_mut().expect("header pushed");
                while !cur.at_end() {
                    let (w, span) = cur.word("an object")?;
                    if !is_object_token(w) {
                        return Err(ParseError::syntax(span, format!("bad object name `{w}`")));
                    }
                    entry.items.insert(ObjectId::new(w), 1);
                }
            }
            Section::Rules => {
                let span = cur.span();
                let rule = parse_rule(&mut cur)?;
                cur.end()?;
                sys.rules.push(rule);
                spans.rules.push(span);
            }
        }
    }

    let Some(structure_span) = spans.structure else {
        let at = lines.last().map_or(SourceSpan::start(), |l| l.end);
        return Err(ParseError::syntax(at, "missing @structure section"));
    };
    sys.structure = parse_structure(&structure_lines, structure_span)?;

    for entry in contents {
        apply_contents(&mut sys.structure, &entry)?;
        spans
            .contents
            .entry(LabelId::new(entry.label.as_str()))
            .or_insert(entry.span);
    }
    Ok((sys, spans))
}

fn remaining(cur: &Cursor<'_>) -> usize {
    let mut n = 0;
    while cur.peek_at(n).is_some() {
        n += 1;
    }
    n
}

/// `label:` or `label#k:`.
fn contents_header(cur: &mut Cursor<'_>) -> Result<ContentsEntry, ParseError> {
    let (target, span) = cur.word("a membrane label")?;
    cur.expect(&Tok::Colon)?;
    let (label, occurrence) = match target.split_once('#') {
        Some((h, k)) => {
            let k: usize = k
                .parse()
                .ok()
                .filter(|k| *k >= 1)
                .ok_or_else(|| ParseError::syntax(span, format!("bad occurrence number in `{target}`")))?;
            (h, Some(k))
        }
        None => (target, None),
    };
    if !is_label_token(label) {
        return Err(ParseError::syntax(span, format!("bad label `{label}`")));
    }
    Ok(ContentsEntry {
        label: label.to_string(),
        occurrence,
        items: Multiset::new(),
        span,
    })
}

fn apply_contents(root: &mut Membrane, entry: &ContentsEntry) -> Result<(), ParseError> {
    fn go(m: &mut Membrane, entry: &ContentsEntry, seen: &mut usize) {
        if m.label.as_str() == entry.label {
            *seen += 1;
            if entry.occurrence.is_none_or(|k| k == *seen) {
                m.contents.add_all(&entry.items);
            }
        }
        for c in &mut m.children {
            go(c, entry, seen);
        }
    }
    let mut seen = 0;
    go(root, entry, &mut seen);
    let wanted = entry.occurrence.unwrap_or(1);
    if seen < wanted {
        let what = match entry.occurrence {
            Some(k) => format!("there is no membrane number {k} labelled `{}`", entry.label),
            None => format!("no membrane is labelled `{}`", entry.label),
        };
        return Err(ParseError::single(
            ErrorCode::Invalid(memdep_core::IssueCode::UnknownLabel),
            entry.span,
            what,
        ));
    }
    Ok(())
}

/// `[label child*]`, possibly spread over several lines.
fn parse_structure(lines: &[(&Line, usize)], header: SourceSpan) -> Result<Membrane, ParseError> {
    let tokens: Vec<&super::lex::Token> = lines.iter().flat_map(|(l, start)| l.tokens[*start..].iter()).collect();
    let mut pos = 0;
    let end_span = lines.last().map_or(header, |(l, _)| l.end);
    fn membrane(tokens: &[&super::lex::Token], pos: &mut usize, end: SourceSpan) -> Result<Membrane, ParseError> {
        let at = |p: usize| tokens.get(p).map_or(end, |t| t.span);
        match tokens.get(*pos).map(|t| &t.tok) {
            Some(Tok::Open) => *pos += 1,
            Some(t) => {
                return Err(ParseError::syntax(
                    at(*pos),
                    format!("expected `[`, found {}", t.describe()),
                ))
            }
            None => return Err(ParseError::syntax(end, "expected `[`")),
        }
        let label = match tokens.get(*pos).map(|t| &t.tok) {
            Some(Tok::Word(w)) if is_label_token(w) => w.clone(),
            Some(t) => {
                return Err(ParseError::syntax(
                    at(*pos),
                    format!("expected a label, found {}", t.describe()),
                ))
            }
            None => return Err(ParseError::syntax(end, "expected a label")),
        };
        *pos += 1;
        let mut m = Membrane::new(LabelId::new(label));
        loop {
            match tokens.get(*pos).map(|t| &t.tok) {
                Some(Tok::Close) => {
                    *pos += 1;
                    return Ok(m);
                }
                Some(Tok::Open) => m.children.push(membrane(tokens, pos, end)?),
                Some(t) => {
                    return Err(ParseError::syntax(
                        at(*pos),
                        format!("expected `[` or `]`, found {}", t.describe()),
                    ))
                }
                None => return Err(ParseError::syntax(end, "unbalanced brackets: missing `]`")),
            }
        }
    }
    let root = membrane(&tokens, &mut pos, end_span)?;
    if let Some(t) = tokens.get(pos) {
        return Err(ParseError::syntax(
            t.span,
            format!("unexpected {} after the structure", t.tok.describe()),
        ));
    }
    Ok(root)
}

fn object(cur: &mut Cursor<'_>) -> Result<ObjectId, ParseError> {
    let (w, span) = cur.word("an object")?;
    if !is_object_token(w) {
        return Err(ParseError::syntax(span, format!("bad object name `{w}`")));
    }
    Ok(ObjectId::new(w))
}

fn label_word(cur: &mut Cursor<'_>) -> Result<LabelId, ParseError> {
    let (w, span) = cur.word("a label")?;
    if !is_label_token(w) {
        return Err(ParseError::syntax(span, format!("bad label `{w}`")));
    }
    Ok(LabelId::new(w))
}

fn same_label(span: SourceSpan, got: &str, want: &LabelId) -> Result<(), ParseError> {
    if got == want.as_str() {
        Ok(())
    } else {
        Err(ParseError::syntax(span, format!("label `{got}` should be `{want}`")))
    }
}

/// `[h1][h2]...` child markers inside a division rule.
fn child(cur: &mut Cursor<'_>) -> Result<LabelId, ParseError> {
    cur.expect(&Tok::Open)?;
    let h = label_word(cur)?;
    cur.expect(&Tok::Close)?;
    Ok(h)
}

fn parse_rule(cur: &mut Cursor<'_>) -> Result<Rule, ParseError> {
    if let Some(Tok::Word(_)) = cur.peek() {
        // a []_h -> [b]_h
        let lhs = object(cur)?;
        cur.expect(&Tok::Open)?;
        let label = LabelId::new(cur.close_label()?);
        cur.expect(&Tok::Arrow)?;
        cur.expect(&Tok::Open)?;
        let rhs = object(cur)?;
        let span = cur.span();
        let h = cur.close_label()?;
        same_label(span, h, &label)?;
        return Ok(Rule::SendIn { label, lhs, rhs });
    }
    cur.expect(&Tok::Open)?;
    let lhs = object(cur)?;
    match cur.peek() {
        Some(Tok::Arrow) => {
            // [a -> u]_h
            cur.expect(&Tok::Arrow)?;
            let mut rhs = Multiset::new();
            while let Some(Tok::Word(_)) = cur.peek() {
                rhs.insert(object(cur)?, 1);
            }
            let label = LabelId::new(cur.close_label()?);
            Ok(Rule::Evolve { label, lhs, rhs })
        }
        Some(Tok::Open) => {
            // [a [h1][h2][h3]]_h0 -> [b [h1][h3]]_h0 [c [h2][h3]]_h0
            let (h1, h2, h3) = (child(cur)?, child(cur)?, child(cur)?);
            let label = LabelId::new(cur.close_label()?);
            cur.expect(&Tok::Arrow)?;
            let copy = |cur: &mut Cursor<'_>, kept: &LabelId| -> Result<ObjectId, ParseError> {
                cur.expect(&Tok::Open)?;
                let o = object(cur)?;
                for want in [kept, &h3] {
                    let span = cur.span();
                    let got = child(cur)?;
                    same_label(span, got.as_str(), want)?;
                }
                let span = cur.span();
                let h = cur.close_label()?;
                same_label(span, h, &label)?;
                Ok(o)
            };
            let first = copy(cur, &h1)?;
            let second = copy(cur, &h2)?;
            Ok(Rule::DivideNonElementary {
                label: label.clone(),
                lhs,
                first,
                second,
                first_child: h1,
                second_child: h2,
                shared_child: h3,
            })
        }
        Some(Tok::CloseLabel(_)) => {
            let label = LabelId::new(cur.close_label()?);
            cur.expect(&Tok::Arrow)?;
            match (cur.peek(), cur.peek_at(1)) {
                (Some(Tok::Word(_)), _) => Ok(Rule::Dissolve {
                    label,
                    lhs,
                    rhs: object(cur)?,
                }),
                (Some(Tok::Open), Some(Tok::CloseLabel(_))) => {
                    // []_h b
                    cur.expect(&Tok::Open)?;
                    let span = cur.span();
                    let h = cur.close_label()?;
                    same_label(span, h, &label)?;
                    Ok(Rule::SendOut {
                        label,
                        lhs,
                        rhs: object(cur)?,
                    })
                }
                _ => {
                    // [b]_h [c]_h
                    let part = |cur: &mut Cursor<'_>| -> Result<ObjectId, ParseError> {
                        cur.expect(&Tok::Open)?;
                        let o = object(cur)?;
                        let span = cur.span();
                        let h = cur.close_label()?;
                        same_label(span, h, &label)?;
                        Ok(o)
                    };
                    let first = part(cur)?;
                    let second = part(cur)?;
                    Ok(Rule::DivideElementary {
                        label: label.clone(),
                        lhs,
                        first,
                        second,
                    })
                }
            }
        }
        _ => {
            let span = cur.span();
            Err(ParseError::syntax(
                span,
                "expected `->`, `[` or `]_label` after the left-hand object",
            ))
        }
    }
}

fn write_structure(out: &mut String, m: &Membrane) {
    let _ = write!(out, "[{}", m.label);
    for c in &m.children {
        out.push(' ');
        write_structure(out, c);
    }
    out.push(']');
}

/// Canonical text: sorted declarations, one rule per line, LF endings.
pub fn serialize_system(sys: &MembraneSystem) -> String {
    let mut out = String::new();
    let join = |items: Vec<&str>| items.join(" ");
    let _ = writeln!(
        out,
        "@objects {}",
        join(sys.alphabet.iter().map(|o| o.as_str()).collect()).trim_end()
    );
    let labels: Vec<&str> = sys
        .labels
        .iter()
        .map(|h| h.as_str())
        .filter(|h| *h != memdep_core::system::ENV)
        .collect();
    if labels.is_empty() {
        out.push_str("@labels\n");
    } else {
        let _ = writeln!(out, "@labels {}", join(labels));
    }
    out.push_str("@structure ");
    write_structure(&mut out, &sys.structure);
    out.push('\n');

    let nodes = sys.structure.preorder();
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    for (m, _) in &nodes {
        *totals.entry(m.label.as_str()).or_insert(0) += 1;
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (m, _) in &nodes {
        let k = seen.entry(m.label.as_str()).or_insert(0);
        *k += 1;
        if m.contents.is_empty() {
            continue;
        }
        if totals[m.label.as_str()] > 1 {
            let _ = writeln!(out, "@contents {}#{}: {}", m.label, k, m.contents);
        } else {
            let _ = writeln!(out, "@contents {}: {}", m.label, m.contents);
        }
    }
    if let Some(h) = &sys.input_label {
        let _ = writeln!(out, "@input {h}");
    }
    if sys.yes.as_str() != "yes" {
        let _ = writeln!(out, "@yes {}", sys.yes);
    }
    if sys.no.as_str() != "no" {
        let _ = writeln!(out, "@no {}", sys.no);
    }
    out.push_str("@rules\n");
    for r in &sys.rules {
        let _ = writeln!(out, "{r}");
    }
    out
}
