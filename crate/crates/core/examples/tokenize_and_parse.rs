//! Tokenizing a test method and splitting a unified diff into hunks.
//!
//! cargo run --example tokenize_and_parse

use patchtriage::textprep::{parse_diff, tokenize_hunk, tokenize_test};

const TEST: &str = r#"
    public void testDrawWithNullInfo() {
        XMLParser parser = new XMLParser();
        assertTrue(chart.getPlot() != null && parser.parse2D(input));
    }
"#;

const DIFF: &str = "\
--- a/source/org/jfree/chart/axis/Axis.java
+++ b/source/org/jfree/chart/axis/Axis.java
@@ -1190,3 +1190,5 @@
         Rectangle2D hotspot = new Rectangle2D.Double();
+        if (plotState == null) {
+            return;
+        }
         ChartRenderingInfo owner = plotState.getOwner();
@@ -1240,2 +1242,2 @@
-        owner.addEntity(hotspot);
+        if (owner != null) owner.addEntity(hotspot);
     }
";

fn main() {
    let tokens = tokenize_test(TEST).expect("test has identifiers");
    println!("test tokens ({}):\n  {tokens}", tokens.len());

    let hunks = parse_diff(DIFF).expect("diff has changed lines");
    for (i, h) in hunks.iter().enumerate() {
        println!("\nhunk {i}:");
        for l in h.lines() {
            println!("  {}{}", l.marker.as_char(), l.text);
        }
        println!("  tokens: {}", tokenize_hunk(h));
    }
}
