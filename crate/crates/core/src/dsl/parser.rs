use crate::model::{
    Cardinality, ComponentType, ConnectorMotif, Diagram, Ident, Lts, Model, MotifEnd, PortTypeRef, SourceSpan,
    Transition, TransitionKind, Typing,
};

use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

pub(crate) fn parse(text: &str, file: &str) -> Result<Model, ParseError> {
    let tokens = tokenize(text, file)?;
    Parser { tokens, pos: 0 }.model()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError::new(t.span.clone(), format!("expected {expected}, found {}", t.tok.describe()))
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Token, ParseError> {
        if self.at_keyword(kw) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("'{kw}'")))
        }
    }

    fn name(&mut self, what: &str) -> Result<Ident, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let t = self.bump();
                Ok(Ident::spanned(s, t.span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn int(&mut self, what: &str) -> Result<(u64, SourceSpan), ParseError> {
        match self.peek().tok {
            Tok::Int(n) => {
                let t = self.bump();
                Ok((n, t.span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn small_int(&mut self, what: &str) -> Result<(u32, SourceSpan), ParseError> {
        let (n, span) = self.int(what)?;
        let n = u32::try_from(n).map_err(|_| ParseError::new(span.clone(), format!("{what} {n} is out of range")))?;
        Ok((n, span))
    }

    fn name_list(&mut self, what: &str) -> Result<Vec<Ident>, ParseError> {
        let mut names = vec![self.name(what)?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            names.push(self.name(what)?);
        }
        Ok(names)
    }

    fn model(mut self) -> Result<Model, ParseError> {
        let mut components = Vec::new();
        loop {
            if self.at_keyword("component") {
                components.push(self.component()?);
            } else if self.at_keyword("diagram") {
                let diagram = self.diagram()?;
                if self.peek().tok != Tok::Eof {
                    return Err(self.unexpected("end of input"));
                }
                return Ok(Model { components, diagram });
            } else if components.is_empty() {
                return Err(self.unexpected("'component'"));
            } else {
                return Err(self.unexpected("'component' or 'diagram'"));
            }
        }
    }

    fn component(&mut self) -> Result<ComponentType, ParseError> {
        let start = self.keyword("component")?.span;
        let name = self.name("component type name")?;
        self.expect(Tok::LParen)?;
        self.keyword("n")?;
        self.expect(Tok::Eq)?;
        let cardinality = match self.peek().tok.clone() {
            Tok::Int(_) => Cardinality::Fixed(self.small_int("cardinality")?.0),
            Tok::Ident(s) => {
                self.bump();
                Cardinality::Symbolic(s)
            }
            _ => return Err(self.unexpected("cardinality (integer or parameter name)")),
        };
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;

        self.keyword("ports")?;
        let ports = self.name_list("port name")?;
        let events = if self.at_keyword("events") {
            self.bump();
            self.name_list("event name")?
        } else {
            Vec::new()
        };
        self.keyword("states")?;
        let states = self.name_list("state name")?;
        let mut initial = Vec::new();
        while self.at_keyword("initial") && *self.peek_at(1) != Tok::Arrow {
            self.bump();
            initial.push(self.name("initial state name")?);
        }
        let mut transitions = Vec::new();
        while self.peek().tok != Tok::RBrace {
            transitions.push(self.transition()?);
        }
        let end = self.expect(Tok::RBrace)?.span;
        Ok(ComponentType {
            name,
            cardinality,
            ports,
            events,
            lts: Lts { states, initial, transitions },
            span: start.to(&end),
        })
    }

    fn transition(&mut self) -> Result<Transition, ParseError> {
        let source = self.name("transition source state or '}'")?;
        self.expect(Tok::Arrow)?;
        let destination = self.name("destination state")?;
        let (kind, end) = if self.at_keyword("on") {
            self.bump();
            let l = self.name("port name")?;
            let span = l.span.clone();
            (TransitionKind::Enforceable(l), span)
        } else if self.at_keyword("when") {
            self.bump();
            let l = self.name("event name")?;
            let span = l.span.clone();
            (TransitionKind::Spontaneous(l), span)
        } else if self.at_keyword("internal") {
            (TransitionKind::Internal, self.bump().span)
        } else {
            return Err(self.unexpected("'on', 'when' or 'internal'"));
        };
        let span = source.span.to(&end);
        Ok(Transition { source, destination, kind, span })
    }

    fn diagram(&mut self) -> Result<Diagram, ParseError> {
        let start = self.keyword("diagram")?.span;
        self.expect(Tok::LBrace)?;
        let mut motifs = Vec::new();
        while self.at_keyword("motif") {
            motifs.push(self.motif()?);
        }
        if self.peek().tok != Tok::RBrace {
            return Err(self.unexpected("'motif' or '}'"));
        }
        let end = self.bump().span;
        Ok(Diagram { motifs, span: start.to(&end) })
    }

    fn motif(&mut self) -> Result<ConnectorMotif, ParseError> {
        let start = self.keyword("motif")?.span;
        let id = self.name("motif name")?;
        self.expect(Tok::LBrace)?;
        let mut ends = vec![self.end()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            ends.push(self.end()?);
        }
        let end = self.expect(Tok::RBrace)?.span;
        Ok(ConnectorMotif { id, ends, span: start.to(&end) })
    }

    fn end(&mut self) -> Result<MotifEnd, ParseError> {
        let component = self.name("component type name")?;
        self.expect(Tok::Dot)?;
        let port = self.name("port name")?;
        self.expect(Tok::LBracket)?;
        self.keyword("m")?;
        self.expect(Tok::Eq)?;
        let (multiplicity, mspan) = self.small_int("multiplicity")?;
        if multiplicity == 0 {
            return Err(ParseError::new(mspan, "multiplicity must be at least 1".into()));
        }
        self.expect(Tok::Comma)?;
        self.keyword("d")?;
        self.expect(Tok::Eq)?;
        let (degree, _) = self.small_int("degree")?;
        self.expect(Tok::RBracket)?;
        let typing = if self.at_keyword("sync") {
            Typing::Synchron
        } else if self.at_keyword("trigger") {
            Typing::Trigger
        } else {
            return Err(self.unexpected("'sync' or 'trigger'"));
        };
        let end = self.bump().span;
        Ok(MotifEnd {
            port: PortTypeRef::new(component.name, port.name),
            multiplicity,
            degree,
            typing,
            span: component.span.to(&end),
        })
    }
}
