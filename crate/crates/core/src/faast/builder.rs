//! Flow augmentation passes over a parsed [`Ast`].

use std::collections::HashMap;

use crate::java::{Ast, NodeId, NodeKind, Role};

use super::graph::{Edge, EdgeKind, FaAstGraph};

/// `AstChild` edges for the tree plus the matching reversed `AstParent` edges.
pub fn add_ast_edges(ast: &Ast) -> Vec<Edge> {
    let mut edges = Vec::with_capacity(2 * ast.len().saturating_sub(1));
    for node in &ast.nodes {
        for &child in &node.children {
            edges.push(Edge::new(node.id, child, EdgeKind::AstChild));
            edges.push(Edge::new(child, node.id, EdgeKind::AstParent));
        }
    }
    edges
}

/// Links each terminal to the next terminal in traversal order.
pub fn add_next_token_edges(ast: &Ast) -> Vec<Edge> {
    // Ids are pre-order, so terminals in id order are in source order.
    let terminals: Vec<NodeId> = ast.terminals().map(|n| n.id).collect();
    terminals.windows(2).map(|w| Edge::new(w[0], w[1], EdgeKind::NextToken)).collect()
}

/// Links consecutive children of every node.
pub fn add_next_sibling_edges(ast: &Ast) -> Vec<Edge> {
    ast.nodes
        .iter()
        .flat_map(|n| n.children.windows(2).map(|w| Edge::new(w[0], w[1], EdgeKind::NextSibling)))
        .collect()
}

fn is_variable_occurrence(ast: &Ast, id: NodeId) -> bool {
    let node = ast.node(id);
    node.kind == NodeKind::Name
        && !matches!(node.role, Role::Selector | Role::Label)
        && !matches!(node.value.as_deref(), Some("this" | "super") | None)
}

/// Links each variable occurrence to its next occurrence.
///
/// Occurrences are chained in textual order inside each method body (or, for
/// field initializers, inside the class body). A declaration always starts a
/// new chain. A field declaration links to the first occurrence of its name
/// in each method of the class (or a nested class) that uses it before
/// declaring it.
pub fn add_next_use_edges(ast: &Ast) -> Vec<Edge> {
    let n = ast.len();
    // Nearest enclosing MethodDecl or ClassDecl.
    let mut scope = vec![ast.root; n];
    for node in &ast.nodes {
        if let Some(p) = node.parent {
            scope[node.id] = match ast.node(p).kind {
                NodeKind::MethodDecl | NodeKind::ClassDecl => p,
                _ => scope[p],
            };
        }
    }

    let mut fields: HashMap<(NodeId, &str), NodeId> = HashMap::new();
    for node in &ast.nodes {
        if node.kind != NodeKind::Name || node.role != Role::Declarator {
            continue;
        }
        let Some(decl) = node.parent else { continue };
        if ast.node(decl).kind != NodeKind::FieldDecl {
            continue;
        }
        if let (Some(class), Some(name)) = (ast.node(decl).parent, node.value.as_deref()) {
            fields.entry((class, name)).or_insert(node.id);
        }
    }

    let mut edges = Vec::new();
    let mut last: HashMap<(NodeId, &str), NodeId> = HashMap::new();
    let mut first_use_in_method: Vec<(NodeId, &str, NodeId)> = Vec::new();

    for node in &ast.nodes {
        if !is_variable_occurrence(ast, node.id) {
            continue;
        }
        let name = node.value.as_deref().expect("names carry values");
        let region = scope[node.id];
        let key = (region, name);
        let prev = last.insert(key, node.id);
        if node.role == Role::Declarator {
            continue;
        }
        match prev {
            Some(p) => edges.push(Edge::new(p, node.id, EdgeKind::NextUse)),
            None if ast.node(region).kind == NodeKind::MethodDecl => first_use_in_method.push((region, name, node.id)),
            None => {}
        }
    }

    for (method, name, first) in first_use_in_method {
        let field = ast
            .ancestors(method)
            .filter(|a| a.kind == NodeKind::ClassDecl)
            .find_map(|class| fields.get(&(class.id, name)).copied());
        if let Some(decl) = field {
            edges.push(Edge::new(decl, first, EdgeKind::NextUse));
        }
    }
    edges
}

/// If/else, while, for and sequential-statement edges.
///
/// Loops also get a `NextUse` edge from the body back to the condition.
/// Do-while and switch statements get none.
pub fn add_control_flow_edges(ast: &Ast) -> Vec<Edge> {
    let mut edges = Vec::new();
    for node in &ast.nodes {
        match node.kind {
            NodeKind::IfStmt => {
                let Some(cond) = ast.child_with_role(node.id, Role::Condition) else { continue };
                if let Some(then) = ast.child_with_role(node.id, Role::Then) {
                    edges.push(Edge::new(cond.id, then.id, EdgeKind::IfFlow));
                }
                if let Some(otherwise) = ast.child_with_role(node.id, Role::Else) {
                    edges.push(Edge::new(cond.id, otherwise.id, EdgeKind::ElseFlow));
                }
            }
            NodeKind::WhileStmt => {
                let cond = ast.child_with_role(node.id, Role::Condition);
                let body = ast.child_with_role(node.id, Role::Body);
                if let (Some(cond), Some(body)) = (cond, body) {
                    edges.push(Edge::new(cond.id, body.id, EdgeKind::WhileFlow));
                    edges.push(Edge::new(body.id, cond.id, EdgeKind::NextUse));
                }
            }
            NodeKind::ForStmt => {
                let head = ast
                    .child_with_role(node.id, Role::Condition)
                    .or_else(|| ast.child_with_role(node.id, Role::Iterable))
                    .map_or(node.id, |c| c.id);
                if let Some(body) = ast.child_with_role(node.id, Role::Body) {
                    edges.push(Edge::new(head, body.id, EdgeKind::ForFlow));
                    edges.push(Edge::new(body.id, head, EdgeKind::NextUse));
                }
            }
            NodeKind::Block => {
                edges.extend(node.children.windows(2).map(|w| Edge::new(w[0], w[1], EdgeKind::NextStatement)));
            }
            _ => {}
        }
    }
    edges
}

/// Builds the flow-augmented graph. Edges are sorted by (kind tag, src, dst).
pub fn build_fa_ast(ast: &Ast) -> FaAstGraph {
    let mut edges = add_ast_edges(ast);
    edges.extend(add_next_token_edges(ast));
    edges.extend(add_next_sibling_edges(ast));
    edges.extend(add_next_use_edges(ast));
    edges.extend(add_control_flow_edges(ast));

    let mut graph = FaAstGraph {
        num_nodes: ast.len(),
        node_kinds: ast.nodes.iter().map(|n| n.kind).collect(),
        node_values: ast.nodes.iter().map(|n| n.value.clone()).collect(),
        edges,
        source_path: ast.source_path.clone(),
        label_ms: None,
    };
    graph.sort_edges();
    graph
}
