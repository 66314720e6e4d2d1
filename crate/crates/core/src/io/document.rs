use std::collections::HashMap;
use std::path::PathBuf;

use crate::petri::{Net, Tokens};
use crate::statespace::{check_workflow, CheckError, Verdict};
use crate::wfnet::{validate_wfnet, validate_wfrnet, StructuralReport, WfError, WfNet, WfrNet, Workflow};

/// A parsed net together with its declarations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetDocument {
    pub name: Option<String>,
    pub net: Net,
    pub source: Option<String>,
    pub sink: Option<String>,
    /// Resource places and their initial counts, in declaration order.
    pub resources: Vec<(String, Tokens)>,
    pub origin: Option<PathBuf>,
    /// Line on which each identifier was declared.
    pub lines: HashMap<String, usize>,
    pub warnings: Vec<String>,
}

/// A validated workflow, with resources when the document declares any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadedWorkflow {
    Plain(WfNet),
    Resources(WfrNet),
}

impl LoadedWorkflow {
    pub fn wfnet(&self) -> &WfNet {
        match self {
            LoadedWorkflow::Plain(w) => w,
            LoadedWorkflow::Resources(w) => w.wfnet(),
        }
    }

    pub fn check(&self, k: Tokens, cap: usize) -> Result<Verdict, CheckError> {
        match self {
            LoadedWorkflow::Plain(w) => check_workflow(w, k, cap),
            LoadedWorkflow::Resources(w) => check_workflow(w, k, cap),
        }
    }
}

impl NetDocument {
    pub fn new(net: Net) -> Self {
        NetDocument {
            name: None,
            net,
            source: None,
            sink: None,
            resources: Vec::new(),
            origin: None,
            lines: HashMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn has_resources(&self) -> bool {
        !self.resources.is_empty()
    }

    /// Structural validation; resource mode follows from the declarations.
    pub fn validate(&self) -> Result<(StructuralReport, Option<LoadedWorkflow>), WfError> {
        let source = self.source.as_deref();
        let sink = self.sink.as_deref();
        if self.has_resources() {
            let resources: Vec<(&str, Tokens)> =
                self.resources.iter().map(|(r, n)| (r.as_str(), *n)).collect();
            let v = validate_wfrnet(self.net.clone(), source, sink, &resources)?;
            Ok((v.report, v.wfnet.map(LoadedWorkflow::Resources)))
        } else {
            let v = validate_wfnet(self.net.clone(), source, sink)?;
            Ok((v.report, v.wfnet.map(LoadedWorkflow::Plain)))
        }
    }
}

impl Workflow for LoadedWorkflow {
    fn wfnet(&self) -> &WfNet {
        LoadedWorkflow::wfnet(self)
    }

    fn resources(&self) -> &[(usize, Tokens)] {
        match self {
            LoadedWorkflow::Plain(_) => &[],
            LoadedWorkflow::Resources(w) => w.resources(),
        }
    }

    fn initial_marking(&self, k: Tokens) -> Result<crate::petri::Marking, WfError> {
        match self {
            LoadedWorkflow::Plain(w) => w.initial_marking(k),
            LoadedWorkflow::Resources(w) => w.initial_marking(k),
        }
    }

    fn final_marking(&self, k: Tokens) -> Result<crate::petri::Marking, WfError> {
        match self {
            LoadedWorkflow::Plain(w) => w.final_marking(k),
            LoadedWorkflow::Resources(w) => w.final_marking(k),
        }
    }
}
