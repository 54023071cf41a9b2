//! Terminal styling, controlled by `TCA_COLOR=never|auto`.

use std::io::IsTerminal;

#[derive(Debug, Clone, Copy)]
pub struct Style {
    color: bool,
}

impl Style {
    pub fn from_env() -> Style {
        let color = match std::env::var("TCA_COLOR").as_deref() {
            Ok("never") => false,
            _ => std::io::stdout().is_terminal(),
        };
        Style { color }
    }

    fn paint(self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_owned()
        }
    }

    pub fn good(self, text: &str) -> String {
        self.paint("32", text)
    }

    pub fn bad(self, text: &str) -> String {
        self.paint("31", text)
    }

    pub fn emphasis(self, text: &str) -> String {
        self.paint("1", text)
    }
}
