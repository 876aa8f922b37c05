use super::{LangError, LogicalForm, Predicate};

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Symbol(&'a str),
}

fn tokenize(input: &str) -> Vec<(Token<'_>, usize)> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, ch) in input.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push((Token::Symbol(&input[s..pos]), s));
            }
            match ch {
                '(' => tokens.push((Token::Open, pos)),
                ')' => tokens.push((Token::Close, pos)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    if let Some(s) = start {
        tokens.push((Token::Symbol(&input[s..]), s));
    }
    tokens
}

/// Parses prefix notation such as `(intersection (before ei1) (after t3))`.
/// Bare symbols are constants; errors carry byte offsets.
pub fn parse_sexpr(input: &str) -> Result<LogicalForm, LangError> {
    let tokens = tokenize(input);
    if tokens.is_empty() {
        return Err(LangError::Empty);
    }
    let mut parser = Parser {
        tokens: &tokens,
        at: 0,
        end: input.len(),
    };
    let form = parser.expr()?;
    if let Some((tok, pos)) = tokens.get(parser.at) {
        return Err(match tok {
            Token::Close => LangError::Unbalanced { pos: *pos },
            Token::Open => LangError::Unexpected {
                token: "(".into(),
                pos: *pos,
            },
            Token::Symbol(s) => LangError::Unexpected {
                token: s.to_string(),
                pos: *pos,
            },
        });
    }
    Ok(form)
}

struct Parser<'t, 'a> {
    tokens: &'t [(Token<'a>, usize)],
    at: usize,
    end: usize,
}

impl Parser<'_, '_> {
    fn expr(&mut self) -> Result<LogicalForm, LangError> {
        let Some((tok, pos)) = self.tokens.get(self.at).cloned() else {
            return Err(LangError::Unbalanced { pos: self.end });
        };
        self.at += 1;
        match tok {
            Token::Symbol(s) => Ok(LogicalForm::Constant(s.to_string())),
            Token::Close => Err(LangError::Unbalanced { pos }),
            Token::Open => self.application(pos),
        }
    }

    fn application(&mut self, open: usize) -> Result<LogicalForm, LangError> {
        let (name, name_pos) = match self.tokens.get(self.at) {
            Some((Token::Symbol(s), p)) => (*s, *p),
            Some((Token::Open, p)) => {
                return Err(LangError::Unexpected {
                    token: "(".into(),
                    pos: *p,
                })
            }
            Some((Token::Close, p)) => {
                return Err(LangError::Unexpected {
                    token: ")".into(),
                    pos: *p,
                })
            }
            None => return Err(LangError::Unbalanced { pos: open }),
        };
        self.at += 1;
        let predicate = Predicate::function(name).ok_or_else(|| LangError::UnknownPredicate {
            name: name.to_string(),
            pos: name_pos,
        })?;
        let mut args = Vec::new();
        loop {
            match self.tokens.get(self.at) {
                Some((Token::Close, _)) => {
                    self.at += 1;
                    break;
                }
                Some(_) => args.push(self.expr()?),
                None => return Err(LangError::Unbalanced { pos: open }),
            }
        }
        let expected = match predicate {
            Predicate::Relation(_) => 1,
            Predicate::SetOp(_) => 2,
            Predicate::Constant(_) => unreachable!("function() never yields constants"),
        };
        if args.len() != expected {
            return Err(LangError::Arity {
                name: name.to_string(),
                expected,
                found: args.len(),
                pos: open,
            });
        }
        let mut args = args.into_iter();
        Ok(match predicate {
            Predicate::Relation(r) => LogicalForm::relation(r, args.next().unwrap()),
            Predicate::SetOp(op) => {
                let l = args.next().unwrap();
                LogicalForm::set_op(op, l, args.next().unwrap())
            }
            Predicate::Constant(_) => unreachable!(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AllenRelation::*;

    #[test]
    fn parses_leaf_and_applications() {
        assert_eq!(parse_sexpr("ei1").unwrap(), LogicalForm::constant("ei1"));
        assert_eq!(
            parse_sexpr("(before ei1)").unwrap(),
            LogicalForm::relation(Before, LogicalForm::constant("ei1"))
        );
        let text = "(intersection (before ei1) (after t3))";
        let lf = parse_sexpr(text).unwrap();
        assert_eq!(lf.to_string(), text);
        assert_eq!(
            parse_sexpr("  ( union\n ei1   ei2 ) ").unwrap().to_string(),
            "(union ei1 ei2)"
        );
    }

    #[test]
    fn arity_errors() {
        assert_eq!(
            parse_sexpr("(before)"),
            Err(LangError::Arity {
                name: "before".into(),
                expected: 1,
                found: 0,
                pos: 0
            })
        );
        assert_eq!(
            parse_sexpr("(x (union a))"),
            Err(LangError::UnknownPredicate {
                name: "x".into(),
                pos: 1
            })
        );
        assert_eq!(
            parse_sexpr("(before (union a))"),
            Err(LangError::Arity {
                name: "union".into(),
                expected: 2,
                found: 1,
                pos: 8
            })
        );
        assert!(matches!(
            parse_sexpr("(before a b)"),
            Err(LangError::Arity { found: 2, .. })
        ));
    }

    #[test]
    fn balance_errors() {
        assert_eq!(parse_sexpr("(before ei1"), Err(LangError::Unbalanced { pos: 0 }));
        assert_eq!(parse_sexpr("(before ei1))"), Err(LangError::Unbalanced { pos: 12 }));
        assert_eq!(parse_sexpr(")"), Err(LangError::Unbalanced { pos: 0 }));
        assert_eq!(parse_sexpr("("), Err(LangError::Unbalanced { pos: 0 }));
        assert_eq!(parse_sexpr("   "), Err(LangError::Empty));
    }

    #[test]
    fn other_errors() {
        assert_eq!(
            parse_sexpr("(ei1)"),
            Err(LangError::UnknownPredicate {
                name: "ei1".into(),
                pos: 1
            })
        );
        assert_eq!(
            parse_sexpr("((before a))"),
            Err(LangError::Unexpected {
                token: "(".into(),
                pos: 1
            })
        );
        assert_eq!(
            parse_sexpr("ei1 ei2"),
            Err(LangError::Unexpected {
                token: "ei2".into(),
                pos: 4
            })
        );
    }
}
