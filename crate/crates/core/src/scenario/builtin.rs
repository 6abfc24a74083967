use super::{parse_scenario, Scenario, ScenarioError};

macro_rules! builtins {
    ($($name:literal),* $(,)?) => {
        /// Shipped scenarios as (name, file contents).
        pub const BUILTINS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../../scenarios/", $name, ".scn")))),*
        ];
    };
}

builtins!(
    "sphere_isotropy",
    "sphere_great_circle",
    "sphere_radius2",
    "sphere_radius_half",
    "scaling_negative",
    "paper_example",
    "quadric",
    "projection",
    "identity_helix",
    "s3_helix",
);

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn builtin(name: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario(builtin_source(name).ok_or_else(|| ScenarioError::UnknownBuiltin(name.into()))?)
}
