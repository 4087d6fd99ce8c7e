//! Line-oriented text format for categories, sites and lattices.
//!
//! ```text
//! # comments run to the end of the line
//! object X
//! arrow f : X -> Y
//! compose g . f = h
//! poset { A < B < C, A < D }
//! lattice { 0 < a < 1, 0 < b < 1 }
//! cover Y <- [f, k]
//! ```
//!
//! Identities are implicit and named `id_X`. Composites left out are filled
//! in when the hom-set has exactly one candidate. The poset and lattice
//! blocks generate the arrows `A<B` of the order and cannot be mixed with
//! `arrow` or `compose` lines.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::fincat::{FinCategory, MorId, Morphism};
use crate::lattice::FinLattice;
use crate::site::{Family, SiteSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("PARSE_ERROR at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("VALIDATION_ERROR: {0}")]
    Validation(String),
}

/// A parsed file: the site, plus the lattice and its prescribed joins when
/// the order came from a `lattice` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteFile {
    pub site: SiteSpec,
    pub lattice: Option<FinLattice>,
    pub prescribed: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Arrow,
    Colon,
    Eq,
    Comma,
    Open(char),
    Close(char),
    Newline,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = content.chars().collect();
        let mut j = 0;
        while j < chars.len() {
            let c = chars[j];
            let column = j + 1;
            let single = match c {
                ':' => Some(Tok::Colon),
                '=' => Some(Tok::Eq),
                ',' => Some(Tok::Comma),
                '{' | '[' => Some(Tok::Open(c)),
                '}' | ']' => Some(Tok::Close(c)),
                _ => None,
            };
            if c.is_whitespace() {
                j += 1;
            } else if let Some(tok) = single {
                out.push(Token { tok, line, column });
                j += 1;
            } else if c == '-' && chars.get(j + 1) == Some(&'>') {
                out.push(Token { tok: Tok::Arrow, line, column });
                j += 2;
            } else {
                let start = j;
                while j < chars.len()
                    && !chars[j].is_whitespace()
                    && !":=,{}[]".contains(chars[j])
                    && !(chars[j] == '-' && chars.get(j + 1) == Some(&'>'))
                {
                    j += 1;
                }
                out.push(Token { tok: Tok::Name(chars[start..j].iter().collect()), line, column });
            }
        }
        out.push(Token { tok: Tok::Newline, line, column: chars.len() + 1 });
    }
    out
}

/// A name together with where it was written.
#[derive(Debug, Clone)]
struct Spanned {
    name: String,
    line: usize,
    column: usize,
}

impl Spanned {
    fn error(&self, message: impl Into<String>) -> FormatError {
        FormatError::Parse { line: self.line, column: self.column, message: message.into() }
    }
}

#[derive(Default)]
struct Decls {
    objects: Vec<Spanned>,
    arrows: Vec<(Spanned, Spanned, Spanned)>,
    composes: Vec<(Spanned, Spanned, Spanned)>,
    order: Vec<(Spanned, Spanned)>,
    order_block: Option<(Spanned, bool)>,
    covers: Vec<(Spanned, Vec<Spanned>)>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        match self.peek() {
            Some(t) => (t.line, t.column),
            None => self.tokens.last().map_or((1, 1), |t| (t.line, t.column + 1)),
        }
    }

    fn error(&self, message: impl Into<String>) -> FormatError {
        let (line, column) = self.here();
        FormatError::Parse { line, column, message: message.into() }
    }

    fn name(&mut self, what: &str) -> Result<Spanned, FormatError> {
        match self.peek() {
            Some(Token { tok: Tok::Name(n), line, column }) => {
                let s = Spanned { name: n.clone(), line: *line, column: *column };
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), FormatError> {
        if self.peek().map(|t| &t.tok) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), FormatError> {
        match self.peek() {
            Some(Token { tok: Tok::Name(n), .. }) if n == word => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected `{word}`"))),
        }
    }

    fn end_of_line(&mut self) -> Result<(), FormatError> {
        match self.peek() {
            None => Ok(()),
            Some(Token { tok: Tok::Newline, .. }) => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(self.error("unexpected token at end of statement")),
        }
    }

    fn statements(&mut self) -> Result<Decls, FormatError> {
        let mut d = Decls::default();
        while let Some(t) = self.peek().cloned() {
            let word = match &t.tok {
                Tok::Newline => {
                    self.pos += 1;
                    continue;
                }
                Tok::Name(n) => Spanned { name: n.clone(), line: t.line, column: t.column },
                _ => return Err(self.error("expected a statement")),
            };
            self.pos += 1;
            match word.name.as_str() {
                "object" => d.objects.push(self.name("an object name")?),
                "arrow" => {
                    let f = self.name("an arrow name")?;
                    self.expect(Tok::Colon, "`:`")?;
                    let a = self.name("a domain")?;
                    self.expect(Tok::Arrow, "`->`")?;
                    let b = self.name("a codomain")?;
                    d.arrows.push((f, a, b));
                }
                "compose" => {
                    let g = self.name("an arrow name")?;
                    self.keyword(".")?;
                    let f = self.name("an arrow name")?;
                    self.expect(Tok::Eq, "`=`")?;
                    let h = self.name("an arrow name")?;
                    d.composes.push((g, f, h));
                }
                "poset" | "lattice" => {
                    if d.order_block.is_some() {
                        return Err(word.error("only one poset or lattice block is allowed"));
                    }
                    d.order_block = Some((word.clone(), word.name == "lattice"));
                    self.order_block(&mut d)?;
                }
                "cover" => {
                    let b = self.name("a cover codomain")?;
                    self.expect(Tok::Arrow, "`<-`")
                        .or_else(|_| self.keyword("<-"))
                        .map_err(|_| self.error("expected `<-`"))?;
                    self.expect(Tok::Open('['), "`[`")?;
                    let mut legs = Vec::new();
                    loop {
                        match self.peek().map(|t| t.tok.clone()) {
                            Some(Tok::Close(']')) => {
                                self.pos += 1;
                                break;
                            }
                            Some(Tok::Comma) if !legs.is_empty() => self.pos += 1,
                            Some(Tok::Name(_)) => legs.push(self.name("a leg")?),
                            _ => return Err(self.error("expected an arrow name, `,` or `]`")),
                        }
                    }
                    d.covers.push((b, legs));
                }
                other => return Err(word.error(format!("unknown statement `{other}`"))),
            }
            self.end_of_line()?;
        }
        Ok(d)
    }

    /// `{ A < B < C, D < E }`, possibly spanning lines.
    fn order_block(&mut self, d: &mut Decls) -> Result<(), FormatError> {
        self.expect(Tok::Open('{'), "`{`")?;
        let mut pieces: Vec<Option<Spanned>> = Vec::new();
        loop {
            let t = self.peek().cloned().ok_or_else(|| self.error("unterminated block"))?;
            self.pos += 1;
            match t.tok {
                Tok::Close('}') => break,
                Tok::Newline | Tok::Comma => pieces.push(None),
                Tok::Name(n) => {
                    let mut column = t.column;
                    for (k, part) in n.split('<').enumerate() {
                        if k > 0 {
                            pieces.push(Some(Spanned { name: "<".into(), line: t.line, column }));
                            column += 1;
                        }
                        if !part.is_empty() {
                            pieces.push(Some(Spanned { name: part.into(), line: t.line, column }));
                        }
                        column += part.chars().count();
                    }
                }
                _ => {
                    return Err(FormatError::Parse {
                        line: t.line,
                        column: t.column,
                        message: "unexpected token in block".into(),
                    })
                }
            }
        }
        let mut prev: Option<Spanned> = None;
        let mut pending_lt: Option<Spanned> = None;
        for piece in pieces {
            match piece {
                None => {
                    if let Some(lt) = pending_lt.take() {
                        return Err(lt.error("`<` without a right-hand side"));
                    }
                    prev = None;
                }
                Some(s) if s.name == "<" => {
                    if prev.is_none() || pending_lt.is_some() {
                        return Err(s.error("`<` without a left-hand side"));
                    }
                    pending_lt = Some(s);
                }
                Some(s) => {
                    if !d.objects.iter().any(|o| o.name == s.name) {
                        d.objects.push(s.clone());
                    }
                    if pending_lt.take().is_some() {
                        d.order.push((prev.clone().expect("checked"), s.clone()));
                    }
                    prev = Some(s);
                }
            }
        }
        match pending_lt {
            Some(lt) => Err(lt.error("`<` without a right-hand side")),
            None => Ok(()),
        }
    }
}

fn build(d: Decls) -> Result<SiteFile, FormatError> {
    let mut names: Vec<String> = Vec::new();
    let mut obj_index = HashMap::new();
    for o in &d.objects {
        if obj_index.insert(o.name.clone(), names.len()).is_some() {
            if d.order_block.is_none() {
                return Err(o.error(format!("duplicate object `{}`", o.name)));
            }
            continue;
        }
        names.push(o.name.clone());
    }
    let object =
        |s: &Spanned| obj_index.get(&s.name).copied().ok_or_else(|| s.error(format!("unknown object `{}`", s.name)));

    let mut lattice = None;
    let cat = if let Some((block, is_lattice)) = &d.order_block {
        if let Some((f, _, _)) = d.arrows.first() {
            return Err(f.error(format!("`arrow` cannot be combined with a `{}` block", block.name)));
        }
        if let Some((g, _, _)) = d.composes.first() {
            return Err(g.error(format!("`compose` cannot be combined with a `{}` block", block.name)));
        }
        let n = names.len();
        let mut leq = vec![vec![false; n]; n];
        for (x, row) in leq.iter_mut().enumerate() {
            row[x] = true;
        }
        for (a, b) in &d.order {
            leq[object(a)?][object(b)?] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i][k] && leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
        if let Some((i, j)) =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| i != j && leq[i][j] && leq[j][i])
        {
            return Err(FormatError::Validation(format!(
                "the order has a cycle through {} and {}",
                names[i], names[j]
            )));
        }
        if *is_lattice {
            lattice = Some(
                FinLattice::from_order(names.clone(), leq.clone())
                    .map_err(|e| FormatError::Validation(e.to_string()))?,
            );
        }
        FinCategory::from_order(names, &leq).map_err(|e| FormatError::Validation(e.to_string()))?
    } else {
        explicit_category(&d, names, &object)?
    };

    let mut covers = Vec::new();
    let mut prescribed = Vec::new();
    for (b, legs) in &d.covers {
        let x = object(b)?;
        let mut ids = Vec::new();
        for l in legs {
            ids.push(cat.morphism_by_name(&l.name).ok_or_else(|| l.error(format!("unknown arrow `{}`", l.name)))?);
        }
        let fam = Family::new(&cat, x, ids.iter().copied()).map_err(|e| FormatError::Validation(e.to_string()))?;
        if let Some(l) = &lattice {
            let mut set: Vec<usize> = fam.legs.iter().map(|&f| cat.dom(f)).collect();
            set.sort_unstable();
            if l.join_all(&set) != x {
                return Err(FormatError::Validation(format!(
                    "cover on {} is not the join of its legs' domains",
                    b.name
                )));
            }
            if !(fam.legs.len() == 1 && cat.is_identity(fam.legs[0])) {
                prescribed.push(set);
            }
        }
        covers.push(fam);
    }
    let site = SiteSpec::new(cat, covers).map_err(|e| FormatError::Validation(e.to_string()))?;
    Ok(SiteFile { site, lattice, prescribed })
}

fn explicit_category(
    d: &Decls,
    names: Vec<String>,
    object: &dyn Fn(&Spanned) -> Result<usize, FormatError>,
) -> Result<FinCategory, FormatError> {
    let mut morphisms: Vec<Morphism> =
        names.iter().enumerate().map(|(x, n)| Morphism { name: format!("id_{n}"), dom: x, cod: x }).collect();
    let mut mor_index: HashMap<String, MorId> =
        morphisms.iter().enumerate().map(|(i, m)| (m.name.clone(), i)).collect();
    for (f, a, b) in &d.arrows {
        let (dom, cod) = (object(a)?, object(b)?);
        if mor_index.insert(f.name.clone(), morphisms.len()).is_some() {
            return Err(f.error(format!("duplicate arrow `{}`", f.name)));
        }
        morphisms.push(Morphism { name: f.name.clone(), dom, cod });
    }
    let arrow =
        |s: &Spanned| mor_index.get(&s.name).copied().ok_or_else(|| s.error(format!("unknown arrow `{}`", s.name)));
    let m = morphisms.len();
    let n = names.len();
    let mut comp: Vec<Option<MorId>> = vec![None; m * m];
    for (f, mf) in morphisms.iter().enumerate() {
        comp[mf.cod * m + f] = Some(f);
        comp[f * m + mf.dom] = Some(f);
    }
    let mut given = vec![false; m * m];
    for (g, f, h) in &d.composes {
        let (gi, fi, hi) = (arrow(g)?, arrow(f)?, arrow(h)?);
        let slot = gi * m + fi;
        if given[slot] && comp[slot] != Some(hi) {
            return Err(FormatError::Validation(format!(
                "conflicting composites for {} . {} (line {})",
                g.name, f.name, g.line
            )));
        }
        given[slot] = true;
        comp[slot] = Some(hi);
    }
    let mut homs = vec![Vec::new(); n * n];
    for (f, mf) in morphisms.iter().enumerate() {
        homs[mf.dom * n + mf.cod].push(f);
    }
    for (g, mg) in morphisms.iter().enumerate() {
        for (f, mf) in morphisms.iter().enumerate() {
            if mf.cod == mg.dom && comp[g * m + f].is_none() {
                if let [only] = homs[mf.dom * n + mg.cod][..] {
                    comp[g * m + f] = Some(only);
                }
            }
        }
    }
    FinCategory::new(names, morphisms, (0..n).collect(), comp).map_err(|e| FormatError::Validation(e.to_string()))
}

pub fn parse_file(text: &str) -> Result<SiteFile, FormatError> {
    let mut p = Parser { tokens: lex(text), pos: 0 };
    build(p.statements()?)
}

pub fn parse_site(text: &str) -> Result<SiteSpec, FormatError> {
    parse_file(text).map(|f| f.site)
}

pub fn parse_category(text: &str) -> Result<FinCategory, FormatError> {
    parse_file(text).map(|f| f.site.base)
}

/// Whether the category is exactly what the poset block would rebuild.
fn as_poset(cat: &FinCategory) -> Option<Vec<Vec<bool>>> {
    let n = cat.num_objects();
    if !cat.is_thin() || cat.identities() != (0..n).collect::<Vec<_>>().as_slice() {
        return None;
    }
    let leq: Vec<Vec<bool>> = (0..n).map(|x| (0..n).map(|y| !cat.hom(x, y).is_empty()).collect()).collect();
    match FinCategory::from_order(cat.object_names().to_vec(), &leq) {
        Ok(rebuilt) if rebuilt == *cat => Some(leq),
        _ => None,
    }
}

/// Prints a site so that [`parse_site`] rebuilds it table for table, provided
/// identities occupy the first ids and are named `id_X`.
pub fn print_site(site: &SiteSpec) -> String {
    print_with(site, None)
}

pub fn print_file(file: &SiteFile) -> String {
    print_with(&file.site, file.lattice.as_ref())
}

fn print_with(site: &SiteSpec, lattice: Option<&FinLattice>) -> String {
    let cat = &site.base;
    let mut out = String::new();
    for name in cat.object_names() {
        let _ = writeln!(out, "object {name}");
    }
    if let Some(leq) = as_poset(cat) {
        let n = cat.num_objects();
        let keyword = if lattice.is_some() { "lattice" } else { "poset" };
        let _ = writeln!(out, "{keyword} {{");
        for x in 0..n {
            for y in 0..n {
                let covering = x != y && leq[x][y] && !(0..n).any(|z| z != x && z != y && leq[x][z] && leq[z][y]);
                if covering {
                    let _ = writeln!(out, "  {} < {}", cat.object_name(x), cat.object_name(y));
                }
            }
        }
        out.push_str("}\n");
    } else {
        for f in cat.morphism_ids().filter(|&f| !cat.is_identity(f)) {
            let m = cat.morphism(f);
            let _ = writeln!(out, "arrow {} : {} -> {}", m.name, cat.object_name(m.dom), cat.object_name(m.cod));
        }
        for g in cat.morphism_ids().filter(|&g| !cat.is_identity(g)) {
            for f in cat.morphism_ids().filter(|&f| !cat.is_identity(f)) {
                if let Some(h) = cat.compose(g, f) {
                    let _ = writeln!(
                        out,
                        "compose {} . {} = {}",
                        cat.morphism_name(g),
                        cat.morphism_name(f),
                        cat.morphism_name(h)
                    );
                }
            }
        }
    }
    // the identity family on the terminal object is added back by the parser
    let implied = cat.terminal().map(|t| Family::identity(cat, t));
    for fam in site.covers.iter().filter(|f| Some(*f) != implied.as_ref()) {
        let legs: Vec<&str> = fam.legs.iter().map(|&l| cat.morphism_name(l)).collect();
        let _ = writeln!(out, "cover {} <- [{}]", cat.object_name(fam.codomain), legs.join(", "));
    }
    out
}
