//! Recursive-descent parser for JUnit-style Java test files.
//!
//! Produces a tree without punctuation. Operators, literals, names and type
//! names become terminals carrying their text. Generic type arguments are not
//! parsed into structure; they are kept as raw text on the `TypeRef`.

use super::ast::{Ast, AstNode, NodeKind, Role};
use super::lexer::{Token, TokenKind};
use super::FrontendError;

type PResult<T> = Result<T, FrontendError>;

const MAX_DEPTH: usize = 96;

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double", "void"];

const DECL_MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp", "default",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="];

fn binary_precedence(tok: &Token) -> Option<u8> {
    let p = match (tok.kind, tok.text.as_str()) {
        (TokenKind::Operator, "||") => 1,
        (TokenKind::Operator, "&&") => 2,
        (TokenKind::Operator, "|") => 3,
        (TokenKind::Operator, "^") => 4,
        (TokenKind::Operator, "&") => 5,
        (TokenKind::Operator, "==" | "!=") => 6,
        (TokenKind::Operator, "<" | ">" | "<=" | ">=") | (TokenKind::Keyword, "instanceof") => 7,
        (TokenKind::Operator, "<<" | ">>" | ">>>") => 8,
        (TokenKind::Operator, "+" | "-") => 9,
        (TokenKind::Operator, "*" | "/" | "%") => 10,
        _ => return None,
    };
    Some(p)
}

/// Tree under construction; flattened into an [`Ast`] at the end.
#[derive(Debug)]
struct PNode {
    kind: NodeKind,
    value: Option<String>,
    role: Role,
    children: Vec<PNode>,
    line: u32,
    column: u32,
}

impl PNode {
    fn new(kind: NodeKind, at: (u32, u32)) -> Self {
        PNode { kind, value: None, role: Role::Item, children: Vec::new(), line: at.0, column: at.1 }
    }

    fn leaf(kind: NodeKind, value: impl Into<String>, role: Role, at: (u32, u32)) -> Self {
        PNode { kind, value: Some(value.into()), role, children: Vec::new(), line: at.0, column: at.1 }
    }

    fn role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    fn push(&mut self, child: PNode) {
        self.children.push(child);
    }

    fn with(mut self, child: PNode) -> Self {
        self.children.push(child);
        self
    }

    fn at(&self) -> (u32, u32) {
        (self.line, self.column)
    }
}

#[derive(Clone, Copy)]
struct Mark {
    pos: usize,
    gt_used: usize,
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    // How many `>` of the current `>>`/`>>>` token were already consumed
    // while closing type argument lists.
    gt_used: usize,
    depth: usize,
    anon_depth: usize,
}

/// Parses a token stream into an [`Ast`].
pub fn parse(tokens: &[Token], source_path: &str) -> Result<Ast, FrontendError> {
    let mut p = Parser { toks: tokens, pos: 0, gt_used: 0, depth: 0, anon_depth: 0 };
    let (tree, package, imports) = p.compilation_unit()?;
    Ok(flatten(tree, source_path, package, imports))
}

fn flatten(tree: PNode, source_path: &str, package: Option<String>, imports: Vec<String>) -> Ast {
    let mut nodes: Vec<AstNode> = Vec::new();
    // Explicit stack: (node, parent id). Children pushed in reverse so ids
    // come out in pre-order.
    let mut stack = vec![(tree, None::<usize>)];
    while let Some((pnode, parent)) = stack.pop() {
        let id = nodes.len();
        if let Some(p) = parent {
            nodes[p].children.push(id);
        }
        let PNode { kind, value, role, children, line, column } = pnode;
        nodes.push(AstNode { id, kind, value, children: Vec::new(), parent, role, line, column });
        for child in children.into_iter().rev() {
            stack.push((child, Some(id)));
        }
    }
    Ast { root: 0, nodes, source_path: source_path.to_string(), package, imports }
}

impl<'t> Parser<'t> {
    // ---- token helpers ----------------------------------------------------

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + offset)
    }

    fn here(&self) -> (u32, u32) {
        match self.peek().or_else(|| self.toks.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        }
    }

    fn mark(&self) -> Mark {
        Mark { pos: self.pos, gt_used: self.gt_used }
    }

    fn reset(&mut self, m: Mark) {
        self.pos = m.pos;
        self.gt_used = m.gt_used;
    }

    fn advance(&mut self) -> Option<&'t Token> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
            self.gt_used = 0;
        }
        t
    }

    fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(kind, text))
    }

    fn is_sep(&self, text: &str) -> bool {
        self.is(TokenKind::Separator, text)
    }

    fn is_op(&self, text: &str) -> bool {
        self.gt_used == 0 && self.is(TokenKind::Operator, text)
    }

    fn is_kw(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }

    fn is_ident(&self) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Identifier)
    }

    fn at_eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        let (line, column, found) = match self.peek() {
            Some(t) => (t.line, t.column, t.text.clone()),
            None => {
                let (l, c) = self.here();
                (l, c, "end of file".to_string())
            }
        };
        Err(FrontendError::Parse { line, column, expected: expected.into(), found })
    }

    fn unsupported<T>(&self, what: &str) -> PResult<T> {
        self.error(format!("supported construct ({what} is not supported)"))
    }

    fn expect(&mut self, kind: TokenKind, text: &str) -> PResult<&'t Token> {
        if self.gt_used == 0 && self.is(kind, text) {
            Ok(self.advance().expect("checked"))
        } else {
            self.error(format!("`{text}`"))
        }
    }

    fn expect_sep(&mut self, text: &str) -> PResult<&'t Token> {
        self.expect(TokenKind::Separator, text)
    }

    fn ident(&mut self) -> PResult<&'t Token> {
        if self.is_ident() && self.gt_used == 0 {
            Ok(self.advance().expect("checked"))
        } else {
            self.error("identifier")
        }
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        if self.depth >= MAX_DEPTH {
            return self.error("shallower nesting");
        }
        self.depth += 1;
        let out = f(self);
        self.depth -= 1;
        out
    }

    // ---- compilation unit ---------------------------------------------------

    fn compilation_unit(&mut self) -> PResult<(PNode, Option<String>, Vec<String>)> {
        let mut root = PNode::new(NodeKind::CompilationUnit, (1, 1));
        root.role = Role::Root;
        let mut package = None;
        let mut imports = Vec::new();

        loop {
            if self.is_sep(";") {
                self.advance();
            } else if self.is_kw("package") {
                self.advance();
                package = Some(self.qualified_name(false)?);
                self.expect_sep(";")?;
            } else if self.is_kw("import") {
                self.advance();
                let mut text = String::new();
                if self.is_kw("static") {
                    self.advance();
                    text.push_str("static ");
                }
                text.push_str(&self.qualified_name(true)?);
                self.expect_sep(";")?;
                imports.push(text);
            } else {
                break;
            }
        }

        while !self.at_eof() {
            if self.is_sep(";") {
                self.advance();
                continue;
            }
            let decl = self.type_declaration()?;
            root.push(decl);
        }
        Ok((root, package, imports))
    }

    fn qualified_name(&mut self, allow_star: bool) -> PResult<String> {
        let mut text = self.ident()?.text.clone();
        while self.is_sep(".") {
            self.advance();
            if allow_star && self.is_op("*") {
                self.advance();
                text.push_str(".*");
                break;
            }
            text.push('.');
            text.push_str(&self.ident()?.text);
        }
        Ok(text)
    }

    /// Annotations are returned as nodes; keyword modifiers are dropped.
    fn modifiers(&mut self, allowed: &[&str]) -> PResult<Vec<PNode>> {
        let mut annotations = Vec::new();
        loop {
            if self.is(TokenKind::AnnotationMarker, "@") {
                if self.peek_at(1).is_some_and(|t| t.is(TokenKind::Keyword, "interface")) {
                    return self.unsupported("annotation type declaration");
                }
                annotations.push(self.annotation()?);
            } else if self.peek().is_some_and(|t| t.kind == TokenKind::Keyword && allowed.contains(&t.text.as_str())) {
                // `synchronized (` and `default:` are statements, not modifiers.
                if self.peek_at(1).is_some_and(|t| t.is(TokenKind::Separator, "(") || t.is(TokenKind::Operator, ":") || t.is(TokenKind::Operator, "->")) {
                    break;
                }
                self.advance();
            } else if self.is_ident()
                && self.peek().is_some_and(|t| t.text == "sealed" || t.text == "non")
                && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Keyword || t.kind == TokenKind::Identifier || t.text == "-")
            {
                // `sealed` / `non-sealed`
                if self.peek().is_some_and(|t| t.text == "non") {
                    self.advance();
                    self.expect(TokenKind::Operator, "-")?;
                }
                self.advance();
            } else {
                break;
            }
        }
        Ok(annotations)
    }

    fn annotation(&mut self) -> PResult<PNode> {
        let at = self.here();
        self.expect(TokenKind::AnnotationMarker, "@")?;
        let name_at = self.here();
        let name = self.qualified_name(false)?;
        let mut node = PNode::new(NodeKind::Annotation, at).with(PNode::leaf(NodeKind::Name, name, Role::Label, name_at));
        if self.is_sep("(") {
            self.advance();
            if !self.is_sep(")") {
                loop {
                    let named = self.is_ident() && self.peek_at(1).is_some_and(|t| t.is(TokenKind::Operator, "="));
                    if named {
                        let key = self.ident()?;
                        let op = self.advance().expect("checked `=`");
                        let value = self.element_value()?;
                        let assign = PNode::new(NodeKind::Assign, (key.line, key.column))
                            .with(PNode::leaf(NodeKind::Name, key.text.clone(), Role::Selector, (key.line, key.column)))
                            .with(PNode::leaf(NodeKind::BinaryOp, "=", Role::Operator, (op.line, op.column)))
                            .with(value.role(Role::Initializer))
                            .role(Role::Argument);
                        node.push(assign);
                    } else {
                        node.push(self.element_value()?.role(Role::Argument));
                    }
                    if self.is_sep(",") {
                        self.advance();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sep(")")?;
        }
        Ok(node)
    }

    fn element_value(&mut self) -> PResult<PNode> {
        if self.is(TokenKind::AnnotationMarker, "@") {
            self.annotation()
        } else if self.is_sep("{") {
            self.nested(|p| {
                let at = p.here();
                p.advance();
                let mut init = PNode::new(NodeKind::ArrayInit, at);
                while !p.is_sep("}") {
                    init.push(p.element_value()?);
                    if p.is_sep(",") {
                        p.advance();
                    } else {
                        break;
                    }
                }
                p.expect_sep("}")?;
                Ok(init)
            })
        } else {
            self.nested(|p| p.ternary())
        }
    }

    fn type_declaration(&mut self) -> PResult<PNode> {
        let annotations = self.modifiers(DECL_MODIFIERS)?;
        if self.is_kw("class") || self.is_kw("interface") {
            self.class_declaration(annotations)
        } else if self.is_kw("enum") {
            self.unsupported("enum declaration")
        } else if self.is_record_start() {
            self.unsupported("record declaration")
        } else {
            self.error("class or interface declaration")
        }
    }

    fn is_record_start(&self) -> bool {
        self.is(TokenKind::Identifier, "record")
            && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier)
            && self.peek_at(2).is_some_and(|t| t.is(TokenKind::Separator, "(") || t.is(TokenKind::Operator, "<"))
    }

    fn class_declaration(&mut self, annotations: Vec<PNode>) -> PResult<PNode> {
        let at = self.here();
        let is_interface = self.is_kw("interface");
        self.advance();
        let mut node = PNode::new(NodeKind::ClassDecl, at);
        node.children.extend(annotations);
        let name = self.ident()?;
        node.push(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Label, (name.line, name.column)));
        if self.is_op("<") {
            node.push(self.type_parameters()?);
        }
        if self.is_kw("extends") {
            self.advance();
            node.push(self.type_ref()?);
            while is_interface && self.is_sep(",") {
                self.advance();
                node.push(self.type_ref()?);
            }
        }
        if self.is_kw("implements") {
            self.advance();
            node.push(self.type_ref()?);
            while self.is_sep(",") {
                self.advance();
                node.push(self.type_ref()?);
            }
        }
        if self.is(TokenKind::Identifier, "permits") {
            self.advance();
            node.push(self.type_ref()?);
            while self.is_sep(",") {
                self.advance();
                node.push(self.type_ref()?);
            }
        }
        self.class_body(&mut node)?;
        Ok(node)
    }

    fn class_body(&mut self, owner: &mut PNode) -> PResult<()> {
        self.nested(|p| {
            p.expect_sep("{")?;
            while !p.is_sep("}") {
                if p.at_eof() {
                    return p.error("`}`");
                }
                if let Some(member) = p.member()? {
                    owner.push(member);
                }
            }
            p.expect_sep("}")?;
            Ok(())
        })
    }

    fn member(&mut self) -> PResult<Option<PNode>> {
        if self.is_sep(";") {
            self.advance();
            return Ok(None);
        }
        if self.is_sep("{") {
            return Ok(Some(self.block()?));
        }
        if self.is_kw("static") && self.peek_at(1).is_some_and(|t| t.is(TokenKind::Separator, "{")) {
            self.advance();
            return Ok(Some(self.block()?));
        }
        let at = self.here();
        let annotations = self.modifiers(DECL_MODIFIERS)?;
        if self.is_kw("class") || self.is_kw("interface") {
            return self.class_declaration(annotations).map(Some);
        }
        if self.is_kw("enum") {
            return self.unsupported("enum declaration");
        }
        if self.is_record_start() {
            return self.unsupported("record declaration");
        }

        let type_params = if self.is_op("<") { Some(self.type_parameters()?) } else { None };

        // Constructor: `Name (`
        if self.is_ident() && self.peek_at(1).is_some_and(|t| t.is(TokenKind::Separator, "(")) {
            let mut method = PNode::new(NodeKind::MethodDecl, at);
            method.children.extend(annotations);
            method.children.extend(type_params);
            let name = self.ident()?;
            method.push(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Label, (name.line, name.column)));
            self.method_rest(&mut method)?;
            return Ok(Some(method));
        }

        let ty = self.type_ref()?;
        if self.is_ident() && self.peek_at(1).is_some_and(|t| t.is(TokenKind::Separator, "(")) {
            let mut method = PNode::new(NodeKind::MethodDecl, at);
            method.children.extend(annotations);
            method.children.extend(type_params);
            method.push(ty);
            let name = self.ident()?;
            method.push(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Label, (name.line, name.column)));
            self.method_rest(&mut method)?;
            return Ok(Some(method));
        }
        if type_params.is_some() {
            return self.error("method declaration after type parameters");
        }

        let mut field = PNode::new(NodeKind::FieldDecl, at);
        field.children.extend(annotations);
        field.push(ty);
        self.declarators(&mut field)?;
        self.expect_sep(";")?;
        Ok(Some(field))
    }

    fn method_rest(&mut self, method: &mut PNode) -> PResult<()> {
        self.expect_sep("(")?;
        if !self.is_sep(")") {
            loop {
                method.push(self.formal_parameter()?);
                if self.is_sep(",") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect_sep(")")?;
        self.skip_dims();
        if self.is_kw("throws") {
            self.advance();
            method.push(self.type_ref()?);
            while self.is_sep(",") {
                self.advance();
                method.push(self.type_ref()?);
            }
        }
        if self.is_sep("{") {
            method.push(self.block()?.role(Role::Body));
        } else if self.is_kw("default") {
            return self.unsupported("annotation element default");
        } else {
            self.expect_sep(";")?;
        }
        Ok(())
    }

    fn formal_parameter(&mut self) -> PResult<PNode> {
        let at = self.here();
        let annotations = self.modifiers(&["final"])?;
        let mut param = PNode::new(NodeKind::Param, at);
        param.children.extend(annotations);
        let mut ty = self.type_ref()?;
        if self.is_op("...") {
            self.advance();
            if let Some(v) = ty.value.as_mut() {
                v.push_str("...");
            }
        }
        param.push(ty);
        let name = self.ident()?;
        param.push(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Declarator, (name.line, name.column)));
        self.skip_dims();
        Ok(param)
    }

    fn skip_dims(&mut self) {
        while self.is_sep("[") && self.peek_at(1).is_some_and(|t| t.is(TokenKind::Separator, "]")) {
            self.advance();
            self.advance();
        }
    }

    /// `name [= init] (, name [= init])*`, appended to `owner`.
    fn declarators(&mut self, owner: &mut PNode) -> PResult<()> {
        loop {
            let name = self.ident()?;
            owner.push(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Declarator, (name.line, name.column)));
            self.skip_dims();
            if self.is_op("=") {
                self.advance();
                let init = if self.is_sep("{") { self.array_init()? } else { self.expr()? };
                owner.push(init.role(Role::Initializer));
            }
            if self.is_sep(",") {
                self.advance();
            } else {
                return Ok(());
            }
        }
    }

    // ---- types ---------------------------------------------------------------

    fn type_ref(&mut self) -> PResult<PNode> {
        let at = self.here();
        let text = self.type_text()?;
        Ok(PNode::leaf(NodeKind::TypeRef, text, Role::Type, at))
    }

    fn type_text(&mut self) -> PResult<String> {
        let mut text = String::new();
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.text.as_str()) => {
                text.push_str(&t.text);
                self.advance();
            }
            Some(t) if t.kind == TokenKind::Identifier && self.gt_used == 0 => {
                text.push_str(&t.text);
                self.advance();
                if self.is_op("<") {
                    self.type_arguments(&mut text)?;
                }
                while self.is_sep(".") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier) {
                    self.advance();
                    text.push('.');
                    text.push_str(&self.ident()?.text);
                    if self.is_op("<") {
                        self.type_arguments(&mut text)?;
                    }
                }
            }
            Some(t) if t.kind == TokenKind::AnnotationMarker => return self.unsupported("type annotation"),
            _ => return self.error("type"),
        }
        while self.gt_used == 0 && self.is_sep("[") && self.peek_at(1).is_some_and(|t| t.is(TokenKind::Separator, "]")) {
            self.advance();
            self.advance();
            text.push_str("[]");
        }
        Ok(text)
    }

    fn at_close_angle(&self) -> bool {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Operator => {
                matches!(t.text.as_str(), ">" | ">>" | ">>>") && self.gt_used < t.text.len()
            }
            _ => false,
        }
    }

    fn close_angle(&mut self) -> PResult<()> {
        if !self.at_close_angle() {
            return self.error("`>`");
        }
        let width = self.peek().map_or(1, |t| t.text.len());
        if self.gt_used + 1 == width {
            self.advance();
        } else {
            self.gt_used += 1;
        }
        Ok(())
    }

    fn type_arguments(&mut self, text: &mut String) -> PResult<()> {
        self.nested(|p| {
            p.expect(TokenKind::Operator, "<")?;
            text.push('<');
            if p.at_close_angle() {
                p.close_angle()?;
                text.push('>');
                return Ok(());
            }
            loop {
                if p.is_op("?") {
                    p.advance();
                    text.push('?');
                    if p.is_kw("extends") || p.is_kw("super") {
                        let kw = p.advance().expect("checked");
                        text.push(' ');
                        text.push_str(&kw.text);
                        text.push(' ');
                        text.push_str(&p.type_text()?);
                    }
                } else {
                    text.push_str(&p.type_text()?);
                }
                if p.gt_used == 0 && p.is_sep(",") {
                    p.advance();
                    text.push_str(", ");
                } else {
                    break;
                }
            }
            p.close_angle()?;
            text.push('>');
            Ok(())
        })
    }

    fn type_parameters(&mut self) -> PResult<PNode> {
        let at = self.here();
        self.expect(TokenKind::Operator, "<")?;
        let mut text = String::from("<");
        loop {
            text.push_str(&self.ident()?.text);
            if self.is_kw("extends") {
                self.advance();
                text.push_str(" extends ");
                text.push_str(&self.type_text()?);
                while self.is_op("&") {
                    self.advance();
                    text.push_str(" & ");
                    text.push_str(&self.type_text()?);
                }
            }
            if self.gt_used == 0 && self.is_sep(",") {
                self.advance();
                text.push_str(", ");
            } else {
                break;
            }
        }
        self.close_angle()?;
        text.push('>');
        Ok(PNode::leaf(NodeKind::TypeRef, text, Role::Type, at))
    }

    // ---- statements ----------------------------------------------------------

    fn block(&mut self) -> PResult<PNode> {
        self.nested(|p| {
            let at = p.here();
            p.expect_sep("{")?;
            let mut block = PNode::new(NodeKind::Block, at);
            while !p.is_sep("}") {
                if p.at_eof() {
                    return p.error("`}`");
                }
                if let Some(stmt) = p.statement()? {
                    block.push(stmt);
                }
            }
            p.expect_sep("}")?;
            Ok(block)
        })
    }

    /// A statement in a position that needs a node (if/loop bodies). An
    /// empty `;` becomes an empty block.
    fn required_statement(&mut self) -> PResult<PNode> {
        let at = self.here();
        match self.statement()? {
            Some(s) => Ok(s),
            None => Ok(PNode::new(NodeKind::Block, at)),
        }
    }

    fn paren_condition(&mut self) -> PResult<PNode> {
        self.expect_sep("(")?;
        let cond = self.expr()?;
        self.expect_sep(")")?;
        Ok(cond.role(Role::Condition))
    }

    fn statement(&mut self) -> PResult<Option<PNode>> {
        self.nested(|p| p.statement_inner())
    }

    fn statement_inner(&mut self) -> PResult<Option<PNode>> {
        let at = self.here();
        let Some(tok) = self.peek() else {
            return self.error("statement");
        };

        if tok.is(TokenKind::Separator, "{") {
            return self.block().map(Some);
        }
        if tok.is(TokenKind::Separator, ";") {
            self.advance();
            return Ok(None);
        }

        if tok.kind == TokenKind::Keyword {
            match tok.text.as_str() {
                "if" => {
                    self.advance();
                    let mut node = PNode::new(NodeKind::IfStmt, at).with(self.paren_condition()?);
                    node.push(self.required_statement()?.role(Role::Then));
                    if self.is_kw("else") {
                        self.advance();
                        node.push(self.required_statement()?.role(Role::Else));
                    }
                    return Ok(Some(node));
                }
                "while" => {
                    self.advance();
                    let cond = self.paren_condition()?;
                    let body = self.required_statement()?.role(Role::Body);
                    return Ok(Some(PNode::new(NodeKind::WhileStmt, at).with(cond).with(body)));
                }
                "do" => {
                    self.advance();
                    let body = self.required_statement()?.role(Role::Body);
                    self.expect(TokenKind::Keyword, "while")?;
                    let cond = self.paren_condition()?;
                    self.expect_sep(";")?;
                    return Ok(Some(PNode::new(NodeKind::DoWhileStmt, at).with(body).with(cond)));
                }
                "for" => return self.for_statement().map(Some),
                "switch" => return self.switch_statement().map(Some),
                "return" => {
                    self.advance();
                    let mut node = PNode::new(NodeKind::ReturnStmt, at);
                    if !self.is_sep(";") {
                        node.push(self.expr()?);
                    }
                    self.expect_sep(";")?;
                    return Ok(Some(node));
                }
                "break" | "continue" => {
                    let kind = if tok.text == "break" { NodeKind::BreakStmt } else { NodeKind::ContinueStmt };
                    self.advance();
                    let mut node = PNode::new(kind, at);
                    if self.is_ident() {
                        let label = self.ident()?;
                        node.push(PNode::leaf(NodeKind::Name, label.text.clone(), Role::Label, (label.line, label.column)));
                    }
                    self.expect_sep(";")?;
                    return Ok(Some(node));
                }
                "throw" => {
                    self.advance();
                    let node = PNode::new(NodeKind::ThrowStmt, at).with(self.expr()?);
                    self.expect_sep(";")?;
                    return Ok(Some(node));
                }
                "try" => return self.try_statement().map(Some),
                "synchronized" => {
                    self.advance();
                    let lock = self.paren_condition()?;
                    let body = self.block()?.role(Role::Body);
                    return Ok(Some(PNode::new(NodeKind::SynchronizedStmt, at).with(lock).with(body)));
                }
                "assert" => {
                    self.advance();
                    let mut node = PNode::new(NodeKind::AssertStmt, at).with(self.expr()?.role(Role::Condition));
                    if self.is_op(":") {
                        self.advance();
                        node.push(self.expr()?.role(Role::Argument));
                    }
                    self.expect_sep(";")?;
                    return Ok(Some(node));
                }
                "class" | "interface" | "enum" | "abstract" | "static" => {
                    return self.unsupported("local type declaration");
                }
                "else" | "case" | "default" | "catch" | "finally" => {
                    return self.error("statement");
                }
                _ => {}
            }
        }

        if self.is_record_start() {
            return self.unsupported("local record declaration");
        }

        // label:
        if tok.kind == TokenKind::Identifier && self.peek_at(1).is_some_and(|t| t.is(TokenKind::Operator, ":")) {
            let label = self.ident()?;
            self.advance();
            let name = PNode::leaf(NodeKind::Name, label.text.clone(), Role::Label, (label.line, label.column));
            let body = self.required_statement()?.role(Role::Body);
            return Ok(Some(PNode::new(NodeKind::LabeledStmt, at).with(name).with(body)));
        }

        if self.local_var_decl_ahead() {
            let decl = self.local_var_decl()?;
            self.expect_sep(";")?;
            return Ok(Some(decl));
        }

        let expr = self.expr()?;
        self.expect_sep(";")?;
        Ok(Some(PNode::new(NodeKind::ExprStmt, at).with(expr)))
    }

    fn local_var_decl_ahead(&mut self) -> bool {
        if self.is_kw("final") || self.is(TokenKind::AnnotationMarker, "@") {
            return true;
        }
        let start = self.mark();
        let ok = self.type_text().is_ok()
            && self.is_ident()
            && self.peek_at(1).is_some_and(|t| {
                matches!((t.kind, t.text.as_str()), (TokenKind::Operator, "=" | ":") | (TokenKind::Separator, ";" | "," | "["))
            });
        self.reset(start);
        ok
    }

    fn local_var_decl(&mut self) -> PResult<PNode> {
        let at = self.here();
        let annotations = self.modifiers(&["final"])?;
        let mut node = PNode::new(NodeKind::LocalVarDecl, at);
        node.children.extend(annotations);
        node.push(self.type_ref()?);
        self.declarators(&mut node)?;
        Ok(node)
    }

    fn for_statement(&mut self) -> PResult<PNode> {
        let at = self.here();
        self.expect(TokenKind::Keyword, "for")?;
        self.expect_sep("(")?;
        let mut node = PNode::new(NodeKind::ForStmt, at);

        // Enhanced for: `[final] Type name :`
        let start = self.mark();
        let enhanced = self.modifiers(&["final"]).is_ok()
            && self.type_text().is_ok()
            && self.is_ident()
            && self.peek_at(1).is_some_and(|t| t.is(TokenKind::Operator, ":"));
        self.reset(start);

        if enhanced {
            let decl_at = self.here();
            let annotations = self.modifiers(&["final"])?;
            let mut decl = PNode::new(NodeKind::LocalVarDecl, decl_at).role(Role::ForInit);
            decl.children.extend(annotations);
            decl.push(self.type_ref()?);
            let name = self.ident()?;
            decl.push(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Declarator, (name.line, name.column)));
            node.push(decl);
            self.expect(TokenKind::Operator, ":")?;
            node.push(self.expr()?.role(Role::Iterable));
            self.expect_sep(")")?;
        } else {
            if !self.is_sep(";") {
                if self.local_var_decl_ahead() {
                    node.push(self.local_var_decl()?.role(Role::ForInit));
                } else {
                    loop {
                        node.push(self.expr()?.role(Role::ForInit));
                        if self.is_sep(",") {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
            }
            self.expect_sep(";")?;
            if !self.is_sep(";") {
                node.push(self.expr()?.role(Role::Condition));
            }
            self.expect_sep(";")?;
            if !self.is_sep(")") {
                loop {
                    node.push(self.expr()?.role(Role::ForUpdate));
                    if self.is_sep(",") {
                        self.advance();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sep(")")?;
        }
        node.push(self.required_statement()?.role(Role::Body));
        Ok(node)
    }

    fn switch_statement(&mut self) -> PResult<PNode> {
        let at = self.here();
        self.expect(TokenKind::Keyword, "switch")?;
        let selector = self.paren_condition()?;
        let mut node = PNode::new(NodeKind::SwitchStmt, at).with(selector);
        self.expect_sep("{")?;
        while !self.is_sep("}") {
            let case_at = self.here();
            let mut case = PNode::new(NodeKind::SwitchCase, case_at);
            if self.is_kw("case") {
                self.advance();
                loop {
                    case.push(self.ternary()?.role(Role::Argument));
                    if self.is_sep(",") {
                        self.advance();
                    } else {
                        break;
                    }
                }
            } else if self.is_kw("default") {
                self.advance();
            } else {
                return self.error("`case` or `default`");
            }
            if self.is_op("->") {
                self.advance();
                if self.is_sep("{") {
                    case.push(self.block()?);
                } else if self.is_kw("throw") {
                    if let Some(s) = self.statement()? {
                        case.push(s);
                    }
                } else {
                    let e_at = self.here();
                    let e = self.expr()?;
                    self.expect_sep(";")?;
                    case.push(PNode::new(NodeKind::ExprStmt, e_at).with(e));
                }
            } else {
                self.expect(TokenKind::Operator, ":")?;
                while !(self.is_kw("case") || self.is_kw("default") || self.is_sep("}")) {
                    if self.at_eof() {
                        return self.error("`}`");
                    }
                    if let Some(s) = self.statement()? {
                        case.push(s);
                    }
                }
            }
            node.push(case);
        }
        self.expect_sep("}")?;
        Ok(node)
    }

    fn try_statement(&mut self) -> PResult<PNode> {
        let at = self.here();
        self.expect(TokenKind::Keyword, "try")?;
        let mut node = PNode::new(NodeKind::TryStmt, at);
        let mut has_resources = false;
        if self.is_sep("(") {
            self.advance();
            has_resources = true;
            while !self.is_sep(")") {
                if self.local_var_decl_ahead() {
                    node.push(self.local_var_decl()?.role(Role::Initializer));
                } else {
                    node.push(self.expr()?.role(Role::Initializer));
                }
                if self.is_sep(";") {
                    self.advance();
                } else {
                    break;
                }
            }
            self.expect_sep(")")?;
        }
        node.push(self.block()?.role(Role::Body));
        let mut handlers = 0;
        while self.is_kw("catch") {
            let catch_at = self.here();
            self.advance();
            self.expect_sep("(")?;
            let annotations = self.modifiers(&["final"])?;
            let mut clause = PNode::new(NodeKind::CatchClause, catch_at);
            clause.children.extend(annotations);
            clause.push(self.type_ref()?);
            while self.is_op("|") {
                self.advance();
                clause.push(self.type_ref()?);
            }
            let name = self.ident()?;
            clause.push(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Declarator, (name.line, name.column)));
            self.expect_sep(")")?;
            clause.push(self.block()?.role(Role::Body));
            node.push(clause);
            handlers += 1;
        }
        if self.is_kw("finally") {
            self.advance();
            node.push(self.block()?.role(Role::Finally));
            handlers += 1;
        }
        if handlers == 0 && !has_resources {
            return self.error("`catch` or `finally`");
        }
        Ok(node)
    }

    // ---- expressions -----------------------------------------------------------

    fn expr(&mut self) -> PResult<PNode> {
        self.nested(|p| p.assignment())
    }

    fn assignment(&mut self) -> PResult<PNode> {
        if self.lambda_ahead() {
            return self.lambda();
        }
        let lhs = self.ternary()?;
        if let Some(op) = self.peek().filter(|t| t.kind == TokenKind::Operator && ASSIGN_OPS.contains(&t.text.as_str()) && self.gt_used == 0) {
            self.advance();
            let rhs = if self.is_sep("{") { self.array_init()? } else { self.expr()? };
            let at = lhs.at();
            return Ok(PNode::new(NodeKind::Assign, at)
                .with(lhs.role(Role::Target))
                .with(PNode::leaf(NodeKind::BinaryOp, op.text.clone(), Role::Operator, (op.line, op.column)))
                .with(rhs.role(Role::Initializer)));
        }
        Ok(lhs)
    }

    fn lambda_ahead(&self) -> bool {
        if self.is_ident() {
            return self.peek_at(1).is_some_and(|t| t.is(TokenKind::Operator, "->"));
        }
        if !self.is_sep("(") {
            return false;
        }
        let mut depth = 0usize;
        for (i, t) in self.toks[self.pos..].iter().enumerate() {
            if t.is(TokenKind::Separator, "(") {
                depth += 1;
            } else if t.is(TokenKind::Separator, ")") {
                depth -= 1;
                if depth == 0 {
                    return self.peek_at(i + 1).is_some_and(|t| t.is(TokenKind::Operator, "->"));
                }
            } else if t.is(TokenKind::Separator, ";") || t.is(TokenKind::Separator, "{") {
                return false;
            }
        }
        false
    }

    fn lambda(&mut self) -> PResult<PNode> {
        let at = self.here();
        let mut node = PNode::new(NodeKind::Lambda, at);
        if self.is_ident() {
            let name = self.ident()?;
            let pos = (name.line, name.column);
            node.push(PNode::new(NodeKind::Param, pos).with(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Declarator, pos)));
        } else {
            self.expect_sep("(")?;
            if !self.is_sep(")") {
                loop {
                    let param_at = self.here();
                    let bare = self.is_ident() && self.peek_at(1).is_some_and(|t| t.is(TokenKind::Separator, ",") || t.is(TokenKind::Separator, ")"));
                    if bare {
                        let name = self.ident()?;
                        node.push(PNode::new(NodeKind::Param, param_at).with(PNode::leaf(
                            NodeKind::Name,
                            name.text.clone(),
                            Role::Declarator,
                            (name.line, name.column),
                        )));
                    } else {
                        node.push(self.formal_parameter()?);
                    }
                    if self.is_sep(",") {
                        self.advance();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sep(")")?;
        }
        self.expect(TokenKind::Operator, "->")?;
        let body = if self.is_sep("{") { self.block()? } else { self.expr()? };
        node.push(body.role(Role::Body));
        Ok(node)
    }

    fn ternary(&mut self) -> PResult<PNode> {
        let cond = self.binary(1)?;
        if self.is_op("?") {
            self.advance();
            let then = self.expr()?;
            self.expect(TokenKind::Operator, ":")?;
            let otherwise = if self.lambda_ahead() { self.lambda()? } else { self.nested(|p| p.ternary())? };
            let at = cond.at();
            return Ok(PNode::new(NodeKind::Conditional, at)
                .with(cond.role(Role::Condition))
                .with(then.role(Role::Then))
                .with(otherwise.role(Role::Else)));
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<PNode> {
        let mut lhs = self.unary()?;
        loop {
            if self.gt_used != 0 {
                break;
            }
            let Some(op) = self.peek() else { break };
            let Some(prec) = binary_precedence(op) else { break };
            if prec < min_prec {
                break;
            }
            self.advance();
            let at = lhs.at();
            let op_node = PNode::leaf(NodeKind::BinaryOp, op.text.clone(), Role::Operator, (op.line, op.column));
            if op.text == "instanceof" {
                let annotations = self.modifiers(&["final"])?;
                let mut node = PNode::new(NodeKind::BinaryOp, at).with(lhs.role(Role::Operand)).with(op_node);
                node.children.extend(annotations);
                node.push(self.type_ref()?);
                if self.is_ident() {
                    let name = self.ident()?;
                    node.push(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Declarator, (name.line, name.column)));
                }
                lhs = node;
            } else {
                let rhs = self.nested(|p| p.binary(prec + 1))?;
                lhs = PNode::new(NodeKind::BinaryOp, at)
                    .with(lhs.role(Role::Operand))
                    .with(op_node)
                    .with(rhs.role(Role::Operand));
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<PNode> {
        self.nested(|p| p.unary_inner())
    }

    fn unary_inner(&mut self) -> PResult<PNode> {
        let at = self.here();
        if let Some(op) = self.peek().filter(|t| {
            t.kind == TokenKind::Operator && matches!(t.text.as_str(), "+" | "-" | "++" | "--" | "!" | "~")
        }) {
            self.advance();
            let operand = self.unary()?;
            return Ok(PNode::new(NodeKind::UnaryOp, at)
                .with(PNode::leaf(NodeKind::UnaryOp, op.text.clone(), Role::Operator, (op.line, op.column)))
                .with(operand.role(Role::Operand)));
        }
        if self.is_sep("(") {
            if let Some(ty) = self.cast_ahead() {
                let operand = if self.lambda_ahead() { self.lambda()? } else { self.unary()? };
                return Ok(PNode::new(NodeKind::Cast, at).with(ty).with(operand.role(Role::Operand)));
            }
        }
        let primary = self.primary()?;
        let mut e = self.selectors(primary)?;
        while let Some(op) = self.peek().filter(|t| t.kind == TokenKind::Operator && (t.text == "++" || t.text == "--")) {
            self.advance();
            let at = e.at();
            e = PNode::new(NodeKind::UnaryOp, at)
                .with(e.role(Role::Operand))
                .with(PNode::leaf(NodeKind::UnaryOp, op.text.clone(), Role::Operator, (op.line, op.column)));
        }
        Ok(e)
    }

    /// At `(`: if this is a cast, consumes `( Type )` and returns the type.
    fn cast_ahead(&mut self) -> Option<PNode> {
        let start = self.mark();
        self.advance();
        let primitive = self.peek().is_some_and(|t| t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.text.as_str()));
        let plausible = primitive || self.is_ident();
        if plausible {
            if let Ok(ty) = self.type_ref() {
                let mut bounds_ok = true;
                let mut ty = ty;
                while self.is_op("&") {
                    self.advance();
                    match self.type_text() {
                        Ok(extra) => {
                            if let Some(v) = ty.value.as_mut() {
                                v.push_str(" & ");
                                v.push_str(&extra);
                            }
                        }
                        Err(_) => {
                            bounds_ok = false;
                            break;
                        }
                    }
                }
                if bounds_ok && self.is_sep(")") {
                    let next = self.peek_at(1);
                    let follows_cast = primitive
                        || next.is_some_and(|t| match t.kind {
                            TokenKind::Identifier | TokenKind::Literal => true,
                            TokenKind::Separator => t.text == "(",
                            TokenKind::Keyword => matches!(t.text.as_str(), "this" | "super" | "new"),
                            TokenKind::Operator => t.text == "!" || t.text == "~",
                            TokenKind::AnnotationMarker => false,
                        });
                    if follows_cast {
                        self.advance();
                        return Some(ty);
                    }
                }
            }
        }
        self.reset(start);
        None
    }

    fn arguments(&mut self, call: &mut PNode) -> PResult<()> {
        self.expect_sep("(")?;
        if !self.is_sep(")") {
            loop {
                call.push(self.expr()?.role(Role::Argument));
                if self.is_sep(",") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect_sep(")")?;
        Ok(())
    }

    fn primary(&mut self) -> PResult<PNode> {
        let at = self.here();
        let Some(tok) = self.peek() else {
            return self.error("expression");
        };
        if self.gt_used != 0 {
            return self.error("expression");
        }
        match tok.kind {
            TokenKind::Literal => {
                self.advance();
                Ok(PNode::leaf(NodeKind::Literal, tok.text.clone(), Role::Item, at))
            }
            TokenKind::Identifier => {
                let next = self.peek_at(1);
                if next.is_some_and(|t| t.is(TokenKind::Separator, "(")) {
                    self.advance();
                    let mut call = PNode::new(NodeKind::MethodCall, at).with(PNode::leaf(NodeKind::Name, tok.text.clone(), Role::Selector, at));
                    self.arguments(&mut call)?;
                    return Ok(call);
                }
                // `Foo[].class`, `List<String>::new`-free forms only
                if next.is_some_and(|t| t.is(TokenKind::Separator, "["))
                    && self.peek_at(2).is_some_and(|t| t.is(TokenKind::Separator, "]"))
                {
                    let ty = self.type_ref()?;
                    return self.class_literal_or_ref(ty, at);
                }
                self.advance();
                Ok(PNode::leaf(NodeKind::Name, tok.text.clone(), Role::Reference, at))
            }
            TokenKind::Keyword => match tok.text.as_str() {
                "this" | "super" => {
                    self.advance();
                    if self.is_sep("(") {
                        let mut call = PNode::new(NodeKind::MethodCall, at).with(PNode::leaf(NodeKind::Name, tok.text.clone(), Role::Selector, at));
                        self.arguments(&mut call)?;
                        return Ok(call);
                    }
                    Ok(PNode::leaf(NodeKind::Name, tok.text.clone(), Role::Reference, at))
                }
                "new" => self.creator(),
                "switch" => self.unsupported("switch expression"),
                t if PRIMITIVES.contains(&t) => {
                    let ty = self.type_ref()?;
                    self.class_literal_or_ref(ty, at)
                }
                _ => self.error("expression"),
            },
            TokenKind::Separator if tok.text == "(" => {
                self.advance();
                let inner = self.expr()?;
                self.expect_sep(")")?;
                Ok(inner)
            }
            _ => self.error("expression"),
        }
    }

    fn class_literal_or_ref(&mut self, ty: PNode, at: (u32, u32)) -> PResult<PNode> {
        if self.is_op("::") {
            self.advance();
            let name_at = self.here();
            if self.is_kw("new") {
                self.advance();
                return Ok(PNode::new(NodeKind::MethodRef, at).with(ty.role(Role::Target)).with(PNode::leaf(NodeKind::Name, "new", Role::Selector, name_at)));
            }
            return self.error("`new`");
        }
        self.expect_sep(".")?;
        let name_at = self.here();
        self.expect(TokenKind::Keyword, "class")?;
        Ok(PNode::new(NodeKind::FieldAccess, at).with(ty.role(Role::Target)).with(PNode::leaf(NodeKind::Name, "class", Role::Selector, name_at)))
    }

    fn selectors(&mut self, mut e: PNode) -> PResult<PNode> {
        loop {
            if self.gt_used != 0 {
                return Ok(e);
            }
            let at = e.at();
            if self.is_sep(".") {
                self.advance();
                let name_at = self.here();
                let Some(tok) = self.peek() else {
                    return self.error("member name");
                };
                match (tok.kind, tok.text.as_str()) {
                    (TokenKind::Identifier, _) => {
                        self.advance();
                        let name = PNode::leaf(NodeKind::Name, tok.text.clone(), Role::Selector, name_at);
                        if self.is_sep("(") {
                            let mut call = PNode::new(NodeKind::MethodCall, at).with(e.role(Role::Target)).with(name);
                            self.arguments(&mut call)?;
                            e = call;
                        } else {
                            e = PNode::new(NodeKind::FieldAccess, at).with(e.role(Role::Target)).with(name);
                        }
                    }
                    (TokenKind::Operator, "<") => {
                        let mut text = String::new();
                        self.type_arguments(&mut text)?;
                        let targs = PNode::leaf(NodeKind::TypeRef, text, Role::Type, name_at);
                        let name = self.ident()?;
                        let mut call = PNode::new(NodeKind::MethodCall, at)
                            .with(e.role(Role::Target))
                            .with(targs)
                            .with(PNode::leaf(NodeKind::Name, name.text.clone(), Role::Selector, (name.line, name.column)));
                        self.arguments(&mut call)?;
                        e = call;
                    }
                    (TokenKind::Keyword, "class" | "this" | "super") => {
                        self.advance();
                        e = PNode::new(NodeKind::FieldAccess, at)
                            .with(e.role(Role::Target))
                            .with(PNode::leaf(NodeKind::Name, tok.text.clone(), Role::Selector, name_at));
                    }
                    (TokenKind::Keyword, "new") => return self.unsupported("qualified instance creation"),
                    _ => return self.error("member name"),
                }
            } else if self.is_sep("[") {
                self.advance();
                let index = self.expr()?;
                self.expect_sep("]")?;
                e = PNode::new(NodeKind::ArrayAccess, at).with(e.role(Role::Target)).with(index.role(Role::Argument));
            } else if self.is_op("::") {
                self.advance();
                let name_at = self.here();
                let name = if self.is_kw("new") {
                    self.advance();
                    "new".to_string()
                } else {
                    self.ident()?.text.clone()
                };
                e = PNode::new(NodeKind::MethodRef, at)
                    .with(e.role(Role::Target))
                    .with(PNode::leaf(NodeKind::Name, name, Role::Selector, name_at));
            } else {
                return Ok(e);
            }
        }
    }

    fn creator(&mut self) -> PResult<PNode> {
        let at = self.here();
        self.expect(TokenKind::Keyword, "new")?;
        if self.is_op("<") {
            let mut ignored = String::new();
            self.type_arguments(&mut ignored)?;
        }
        let ty_at = self.here();
        let mut text = match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.text.as_str()) => {
                self.advance();
                t.text.clone()
            }
            Some(t) if t.kind == TokenKind::Identifier => {
                let mut text = t.text.clone();
                self.advance();
                if self.is_op("<") {
                    self.type_arguments(&mut text)?;
                }
                while self.is_sep(".") {
                    self.advance();
                    text.push('.');
                    text.push_str(&self.ident()?.text);
                    if self.is_op("<") {
                        self.type_arguments(&mut text)?;
                    }
                }
                text
            }
            _ => return self.error("type after `new`"),
        };

        if self.is_sep("[") {
            let mut dims = Vec::new();
            while self.is_sep("[") {
                self.advance();
                if self.is_sep("]") {
                    self.advance();
                } else {
                    dims.push(self.expr()?.role(Role::Argument));
                    self.expect_sep("]")?;
                }
                text.push_str("[]");
            }
            let mut node = PNode::new(NodeKind::ConstructorCall, at).with(PNode::leaf(NodeKind::TypeRef, text, Role::Type, ty_at));
            node.children.extend(dims);
            if self.is_sep("{") {
                node.push(self.array_init()?.role(Role::Initializer));
            }
            return Ok(node);
        }

        let mut node = PNode::new(NodeKind::ConstructorCall, at).with(PNode::leaf(NodeKind::TypeRef, text, Role::Type, ty_at));
        self.arguments(&mut node)?;
        if self.is_sep("{") {
            if self.anon_depth >= 1 {
                return self.unsupported("nested anonymous class");
            }
            self.anon_depth += 1;
            let body = self.class_body(&mut node);
            self.anon_depth -= 1;
            body?;
        }
        Ok(node)
    }

    fn array_init(&mut self) -> PResult<PNode> {
        self.nested(|p| {
            let at = p.here();
            p.expect_sep("{")?;
            let mut node = PNode::new(NodeKind::ArrayInit, at);
            while !p.is_sep("}") {
                let item = if p.is_sep("{") { p.array_init()? } else { p.expr()? };
                node.push(item);
                if p.is_sep(",") {
                    p.advance();
                } else {
                    break;
                }
            }
            p.expect_sep("}")?;
            Ok(node)
        })
    }
}
