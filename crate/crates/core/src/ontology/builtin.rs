//! Sample ontologies bundled with the crate (cricket, football, tennis).

use super::{Limits, Ontology, OntologyId};

macro_rules! bundled {
    ($fn_name:ident, $id:expr, $dir:literal) => {
        pub fn $fn_name() -> Ontology {
            let limits = Limits::parse(
                include_str!(concat!("../../data/ontologies/", $dir, "/limits.conf")),
                concat!($dir, "/limits.conf"),
            )
            .expect("bundled limits parse");
            Ontology::from_tables(
                OntologyId($id),
                $dir,
                include_str!(concat!("../../data/ontologies/", $dir, "/weights.tsv")),
                include_str!(concat!("../../data/ontologies/", $dir, "/syntable.tsv")),
                &limits,
            )
            .expect("bundled ontology is valid")
        }
    };
}

bundled!(cricket, 1, "cricket");
bundled!(football, 2, "football");
bundled!(tennis, 3, "tennis");

/// All three bundled ontologies, ids 1 to 3.
pub fn all() -> Vec<Ontology> {
    vec![cricket(), football(), tennis()]
}

/// The bundled 20-query set, one query per line (see [`crate::eval::parse_query_file`]).
pub const QUERIES: &str = include_str!("../../data/queries.tsv");
