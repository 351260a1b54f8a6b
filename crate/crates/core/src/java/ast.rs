use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

pub type NodeId = usize;

/// Grammar node kinds.
///
/// The first 28 variants are the core grammar. The rest cover statement and
/// expression forms that are common in real test files (try/catch, throw,
/// ternaries, method references, ...) so that those files parse instead of
/// being rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    CompilationUnit,
    ClassDecl,
    FieldDecl,
    MethodDecl,
    Annotation,
    Param,
    Block,
    IfStmt,
    WhileStmt,
    ForStmt,
    DoWhileStmt,
    SwitchStmt,
    ReturnStmt,
    ExprStmt,
    LocalVarDecl,
    Assign,
    MethodCall,
    ConstructorCall,
    FieldAccess,
    Name,
    Literal,
    BinaryOp,
    UnaryOp,
    ArrayAccess,
    ArrayInit,
    Cast,
    Lambda,
    TypeRef,
    SwitchCase,
    TryStmt,
    CatchClause,
    ThrowStmt,
    BreakStmt,
    ContinueStmt,
    AssertStmt,
    SynchronizedStmt,
    LabeledStmt,
    Conditional,
    MethodRef,
}

impl NodeKind {
    pub const ALL: [NodeKind; 39] = [
        NodeKind::CompilationUnit,
        NodeKind::ClassDecl,
        NodeKind::FieldDecl,
        NodeKind::MethodDecl,
        NodeKind::Annotation,
        NodeKind::Param,
        NodeKind::Block,
        NodeKind::IfStmt,
        NodeKind::WhileStmt,
        NodeKind::ForStmt,
        NodeKind::DoWhileStmt,
        NodeKind::SwitchStmt,
        NodeKind::ReturnStmt,
        NodeKind::ExprStmt,
        NodeKind::LocalVarDecl,
        NodeKind::Assign,
        NodeKind::MethodCall,
        NodeKind::ConstructorCall,
        NodeKind::FieldAccess,
        NodeKind::Name,
        NodeKind::Literal,
        NodeKind::BinaryOp,
        NodeKind::UnaryOp,
        NodeKind::ArrayAccess,
        NodeKind::ArrayInit,
        NodeKind::Cast,
        NodeKind::Lambda,
        NodeKind::TypeRef,
        NodeKind::SwitchCase,
        NodeKind::TryStmt,
        NodeKind::CatchClause,
        NodeKind::ThrowStmt,
        NodeKind::BreakStmt,
        NodeKind::ContinueStmt,
        NodeKind::AssertStmt,
        NodeKind::SynchronizedStmt,
        NodeKind::LabeledStmt,
        NodeKind::Conditional,
        NodeKind::MethodRef,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::CompilationUnit => "CompilationUnit",
            NodeKind::ClassDecl => "ClassDecl",
            NodeKind::FieldDecl => "FieldDecl",
            NodeKind::MethodDecl => "MethodDecl",
            NodeKind::Annotation => "Annotation",
            NodeKind::Param => "Param",
            NodeKind::Block => "Block",
            NodeKind::IfStmt => "IfStmt",
            NodeKind::WhileStmt => "WhileStmt",
            NodeKind::ForStmt => "ForStmt",
            NodeKind::DoWhileStmt => "DoWhileStmt",
            NodeKind::SwitchStmt => "SwitchStmt",
            NodeKind::ReturnStmt => "ReturnStmt",
            NodeKind::ExprStmt => "ExprStmt",
            NodeKind::LocalVarDecl => "LocalVarDecl",
            NodeKind::Assign => "Assign",
            NodeKind::MethodCall => "MethodCall",
            NodeKind::ConstructorCall => "ConstructorCall",
            NodeKind::FieldAccess => "FieldAccess",
            NodeKind::Name => "Name",
            NodeKind::Literal => "Literal",
            NodeKind::BinaryOp => "BinaryOp",
            NodeKind::UnaryOp => "UnaryOp",
            NodeKind::ArrayAccess => "ArrayAccess",
            NodeKind::ArrayInit => "ArrayInit",
            NodeKind::Cast => "Cast",
            NodeKind::Lambda => "Lambda",
            NodeKind::TypeRef => "TypeRef",
            NodeKind::SwitchCase => "SwitchCase",
            NodeKind::TryStmt => "TryStmt",
            NodeKind::CatchClause => "CatchClause",
            NodeKind::ThrowStmt => "ThrowStmt",
            NodeKind::BreakStmt => "BreakStmt",
            NodeKind::ContinueStmt => "ContinueStmt",
            NodeKind::AssertStmt => "AssertStmt",
            NodeKind::SynchronizedStmt => "SynchronizedStmt",
            NodeKind::LabeledStmt => "LabeledStmt",
            NodeKind::Conditional => "Conditional",
            NodeKind::MethodRef => "MethodRef",
        }
    }

    pub fn from_name(name: &str) -> Option<NodeKind> {
        NodeKind::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// Kinds allowed to carry a value.
    pub fn carries_value(self) -> bool {
        matches!(
            self,
            NodeKind::Name | NodeKind::Literal | NodeKind::TypeRef | NodeKind::BinaryOp | NodeKind::UnaryOp
        )
    }

    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Block
                | NodeKind::IfStmt
                | NodeKind::WhileStmt
                | NodeKind::ForStmt
                | NodeKind::DoWhileStmt
                | NodeKind::SwitchStmt
                | NodeKind::ReturnStmt
                | NodeKind::ExprStmt
                | NodeKind::LocalVarDecl
                | NodeKind::TryStmt
                | NodeKind::ThrowStmt
                | NodeKind::BreakStmt
                | NodeKind::ContinueStmt
                | NodeKind::AssertStmt
                | NodeKind::SynchronizedStmt
                | NodeKind::LabeledStmt
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a node is to its parent. Kept for graph construction, never emitted
/// into graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Root,
    /// Class member, block statement or other positional child.
    Item,
    /// Name introduced by a variable, field, parameter or catch declaration.
    Declarator,
    /// Name used as a value (a variable, or the head of a qualified name).
    Reference,
    /// Method name or member name after a dot.
    Selector,
    /// Name of a class, method, annotation or statement label.
    Label,
    Type,
    Operator,
    Condition,
    Then,
    Else,
    Body,
    ForInit,
    ForUpdate,
    Iterable,
    Target,
    Argument,
    Initializer,
    Finally,
    Operand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub id: NodeId,
    pub kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub children: Vec<NodeId>,
    #[serde(skip)]
    pub parent: Option<NodeId>,
    pub role: Role,
    pub line: u32,
    pub column: u32,
}

impl AstNode {
    pub fn is_terminal(&self) -> bool {
        self.children.is_empty()
    }
}

/// Syntax tree of one source file. Node ids are assigned in pre-order, so
/// sorting by id is the same as a left-to-right depth-first traversal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ast {
    pub root: NodeId,
    pub nodes: Vec<AstNode>,
    pub source_path: String,
    /// Package and import headers are parsed but kept out of the tree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub imports: Vec<String>,
}

impl Ast {
    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = &AstNode> + '_ {
        self.nodes[id].children.iter().map(move |&c| &self.nodes[c])
    }

    pub fn child_with_role(&self, id: NodeId, role: Role) -> Option<&AstNode> {
        self.children(id).find(|c| c.role == role)
    }

    pub fn terminals(&self) -> impl Iterator<Item = &AstNode> + '_ {
        self.nodes.iter().filter(|n| n.is_terminal())
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = &AstNode> + '_ {
        std::iter::successors(self.nodes[id].parent, move |&p| self.nodes[p].parent).map(move |p| &self.nodes[p])
    }

    pub fn count_kind(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Indented one-node-per-line rendering for `--emit-ast`.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            let node = &self.nodes[id];
            let _ = write!(out, "{:indent$}{}", "", node.kind, indent = depth * 2);
            if let Some(v) = &node.value {
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
            for &c in node.children.iter().rev() {
                stack.push((c, depth + 1));
            }
        }
        out
    }
}
