//! Human-readable diagnostics for query errors, with a caret under the
//! offending column.

use oql_core::OqlError;

pub fn render(source: &str, err: &OqlError) -> String {
    let mut out = format!("error[{}]: {err}", err.stage());
    if let Some(pos) = err.position() {
        let line = source.lines().nth((pos.line as usize).saturating_sub(1)).unwrap_or("");
        let gutter = pos.line.to_string();
        let pad = " ".repeat(gutter.len());
        out.push_str(&format!("\n{pad} --> {}:{}", pos.line, pos.column));
        out.push_str(&format!("\n{pad} |\n{gutter} | {line}\n{pad} | {}^", " ".repeat((pos.column as usize).saturating_sub(1))));
    }
    out
}
