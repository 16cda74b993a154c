use crate::error::{PddlError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SExpr {
    Symbol { text: String, pos: Pos },
    List { items: Vec<SExpr>, pos: Pos },
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol { pos, .. } | SExpr::List { pos, .. } => *pos,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Symbol { .. } => None,
        }
    }

    pub fn expect_symbol(&self, what: &str) -> Result<&str, PddlError> {
        self.as_symbol()
            .ok_or_else(|| PddlError::syntax(self.pos(), format!("expected {what}, found a list")))
    }

    pub fn expect_list(&self, what: &str) -> Result<&[SExpr], PddlError> {
        self.as_list().ok_or_else(|| {
            PddlError::syntax(
                self.pos(),
                format!(
                    "expected {what}, found `{}`",
                    self.as_symbol().unwrap_or_default()
                ),
            )
        })
    }

    /// Head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(SExpr::as_symbol)
    }
}

/// Reads every top-level expression. Symbols are lowercased; `;` starts a
/// comment running to end of line.
pub(crate) fn read_all(text: &str) -> Result<Vec<SExpr>, PddlError> {
    let mut stack: Vec<(Pos, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars().peekable();
    let mut symbol: Option<(Pos, String)> = None;

    fn flush(
        symbol: &mut Option<(Pos, String)>,
        stack: &mut [(Pos, Vec<SExpr>)],
        top: &mut Vec<SExpr>,
    ) {
        if let Some((pos, text)) = symbol.take() {
            let node = SExpr::Symbol { text, pos };
            match stack.last_mut() {
                Some((_, items)) => items.push(node),
                None => top.push(node),
            }
        }
    }

    while let Some(c) = chars.next() {
        if c == '\n' {
            line += 1;
            col = 0;
        } else {
            col += 1;
        }
        let pos = Pos { line, col };
        match c {
            ';' => {
                flush(&mut symbol, &mut stack, &mut top);
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                flush(&mut symbol, &mut stack, &mut top);
                stack.push((pos, Vec::new()));
            }
            ')' => {
                flush(&mut symbol, &mut stack, &mut top);
                let (open, items) = stack
                    .pop()
                    .ok_or_else(|| PddlError::syntax(pos, "unbalanced `)`"))?;
                let node = SExpr::List { items, pos: open };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(node),
                    None => top.push(node),
                }
            }
            c if c.is_whitespace() => flush(&mut symbol, &mut stack, &mut top),
            c => match &mut symbol {
                Some((_, text)) => text.extend(c.to_lowercase()),
                None => symbol = Some((pos, c.to_lowercase().collect())),
            },
        }
    }
    flush(&mut symbol, &mut stack, &mut top);
    if let Some((open, _)) = stack.last() {
        return Err(PddlError::syntax(*open, "unclosed `(`"));
    }
    Ok(top)
}

/// Canonical ground name: `(name arg1 ... argk)`, lowercase, single spaces.
pub fn canonical_name<S: AsRef<str>>(name: &str, args: &[S]) -> String {
    let mut out = String::with_capacity(2 + name.len() + args.len() * 4);
    out.push('(');
    out.push_str(&name.to_lowercase());
    for arg in args {
        out.push(' ');
        out.push_str(&arg.as_ref().to_lowercase());
    }
    out.push(')');
    out
}
