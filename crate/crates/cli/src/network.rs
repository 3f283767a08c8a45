//! Network resolution: built-in topology names and edge-list files.

use std::fs;
use std::path::Path;

use fastmix_core::graph::{self, ClusterShape, Graph};

use crate::{CliError, Result};

/// Resolves a network spec to a labeled graph.
///
/// Recognized names: `complete<m>`, `star<m>`, and `cluster<k>x<c>` (clusters
/// wired complete, joined through a shared parent). Anything else is treated
/// as a path to an edge-list file.
pub fn resolve_network(spec: &str) -> Result<(String, Graph)> {
    if let Some(m) = spec.strip_prefix("complete").and_then(|s| s.parse().ok()) {
        return Ok((spec.to_string(), Graph::complete(m)?));
    }
    if let Some(m) = spec.strip_prefix("star").and_then(|s| s.parse().ok()) {
        return Ok((spec.to_string(), Graph::star(m)?));
    }
    if let Some(rest) = spec.strip_prefix("cluster") {
        if let Some((k, c)) = rest.split_once('x') {
            if let (Ok(k), Ok(c)) = (k.parse(), c.parse()) {
                return Ok((spec.to_string(), Graph::clustered(k, c, ClusterShape::Complete)?));
            }
        }
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Validation(format!(
            "unknown network `{spec}`: not a built-in name (complete<m>, star<m>, \
             cluster<k>x<c>) and no such file"
        )));
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    Ok((label, load_graph(path)?))
}

/// Reads a graph from an edge-list file.
pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    graph::parse_edge_list(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Writes a graph in the edge-list format; `load_graph` reads it back
/// identically.
pub fn save_graph(g: &Graph, path: &Path) -> Result<()> {
    fs::write(path, graph::format_edge_list(g)).map_err(CliError::io(path))
}
