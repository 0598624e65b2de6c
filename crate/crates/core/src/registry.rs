//! Name-keyed registry of interchangeable strategies.
//!
//! Algorithm families with several interchangeable variants (matrix
//! exponentials, master-equation integrators) expose one trait and register
//! their implementations here so that configs and the CLI can select them by
//! name at runtime.

use std::fmt;

type Factory<T> = Box<dyn Fn() -> Box<T> + Send + Sync>;

pub struct Registry<T: ?Sized> {
    family: &'static str,
    entries: Vec<(&'static str, Factory<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(family: &'static str) -> Self {
        Self { family, entries: Vec::new() }
    }

    /// Register a factory under `name`. A later registration with the same
    /// name replaces the earlier one.
    pub fn register<F>(&mut self, name: &'static str, factory: F)
    where
        F: Fn() -> Box<T> + Send + Sync + 'static,
    {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, Box::new(factory)));
    }

    pub fn create(&self, name: &str) -> Result<Box<T>, UnknownStrategy> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| f())
            .ok_or_else(|| UnknownStrategy {
                family: self.family,
                name: name.to_string(),
                known: self.names(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| *n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownStrategy {
    pub family: &'static str,
    pub name: String,
    pub known: Vec<&'static str>,
}

impl fmt::Display for UnknownStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown {} '{}' (known: {})",
            self.family,
            self.name,
            self.known.join(", ")
        )
    }
}

impl std::error::Error for UnknownStrategy {}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter {
        fn greet(&self) -> String;
    }
    struct Hello;
    impl Greeter for Hello {
        fn greet(&self) -> String {
            "hello".into()
        }
    }
    struct Hi;
    impl Greeter for Hi {
        fn greet(&self) -> String {
            "hi".into()
        }
    }

    #[test]
    fn create_by_name_and_replace() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register("a", || Box::new(Hello));
        assert_eq!(reg.create("a").unwrap().greet(), "hello");
        reg.register("a", || Box::new(Hi));
        assert_eq!(reg.create("a").unwrap().greet(), "hi");
        assert_eq!(reg.names(), vec!["a"]);
        let err = reg.create("b").err().unwrap();
        assert!(err.to_string().contains("unknown greeter 'b'"));
    }
}
