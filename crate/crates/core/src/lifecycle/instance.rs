use serde::{Deserialize, Serialize};

use super::{step, ActionDirective, EventKind, IncidentRecord, LifecycleError, LifecycleEvent, SlaState};
use crate::contract::{SlaContract, TermSnapshot};
use crate::time::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedDirective {
    pub at: Timestamp,
    #[serde(flatten)]
    pub directive: ActionDirective,
}

/// Final state and bookkeeping after replaying a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub final_state: SlaState,
    pub directives: Vec<TimedDirective>,
    /// Operational events that arrived after the agreement had ended.
    pub ignored_events: usize,
}

/// One running agreement: contract, lifecycle state and incident history.
///
/// Events must be applied in timestamp order by a single writer. A failed
/// event leaves the instance unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaInstance {
    contract: Option<SlaContract>,
    state: SlaState,
    history: Vec<IncidentRecord>,
    directives: Vec<TimedDirective>,
    last_event: Option<Timestamp>,
    ignored_events: usize,
}

impl SlaInstance {
    pub fn new(contract: SlaContract) -> Self {
        Self {
            contract: Some(contract),
            state: SlaState::Created,
            history: Vec::new(),
            directives: Vec::new(),
            last_event: None,
            ignored_events: 0,
        }
    }

    pub fn state(&self) -> SlaState {
        self.state
    }

    /// Incident history; empty once purged.
    pub fn history(&self) -> &[IncidentRecord] {
        &self.history
    }

    /// Current contract version; `None` once purged.
    pub fn contract(&self) -> Option<&SlaContract> {
        self.contract.as_ref()
    }

    pub fn directives(&self) -> &[TimedDirective] {
        &self.directives
    }

    pub fn ignored_events(&self) -> usize {
        self.ignored_events
    }

    /// Terms in force at `t`, with `t` clamped into the contract lifetime.
    pub fn terms_at(&self, t: Timestamp) -> Result<TermSnapshot, LifecycleError> {
        let contract = self.contract.as_ref().ok_or(LifecycleError::Purged)?;
        Ok(contract.effective_terms_at(contract.lifetime.clamp(t))?)
    }

    pub fn apply(&mut self, event: &LifecycleEvent) -> Result<Vec<ActionDirective>, LifecycleError> {
        if let Some(previous) = self.last_event {
            if event.at < previous {
                return Err(LifecycleError::TimestampRegression { at: event.at, previous });
            }
        }
        let Some(contract) = self.contract.as_ref() else {
            return Err(LifecycleError::InvalidTransition {
                state: self.state,
                event: event.kind.name(),
            });
        };
        let terms = self.terms_at(event.at)?;
        let transition = step(self.state, &terms, &self.history, event)?;

        // Validate everything that can fail before committing.
        let amended = match &event.kind {
            EventKind::RenegotiationAccepted { amendment } => Some(contract.apply_renegotiation(amendment.clone())?),
            _ => None,
        };
        if let EventKind::IncidentResolved { id } = &event.kind {
            let incident = self.history.iter().find(|i| &i.id == id).expect("checked by step");
            if event.at <= incident.start {
                return Err(LifecycleError::InvalidTransition {
                    state: self.state,
                    event: "incident-resolved before it started",
                });
            }
        }

        match &event.kind {
            EventKind::IncidentOpened { incident } => self.history.push(incident.clone()),
            EventKind::IncidentResolved { id } => {
                if let Some(incident) = self.history.iter_mut().find(|i| &i.id == id) {
                    incident.end = Some(event.at);
                }
            }
            _ => {}
        }
        if let Some(contract) = amended {
            self.contract = Some(contract);
        }
        if transition.state == SlaState::Purged {
            self.history.clear();
            self.contract = None;
        }
        self.state = transition.state;
        self.last_event = Some(event.at);
        self.directives
            .extend(transition.actions.iter().map(|d| TimedDirective {
                at: event.at,
                directive: d.clone(),
            }));
        Ok(transition.actions)
    }

    /// Applies a whole trace. Once the agreement has ended, remaining
    /// operational events are skipped and counted; a retention event is
    /// still honoured.
    pub fn replay<'a>(
        &mut self,
        events: impl IntoIterator<Item = &'a LifecycleEvent>,
    ) -> Result<ReplayOutcome, LifecycleError> {
        for event in events {
            if self.state.is_ended() && event.kind != EventKind::FinalizeRetention {
                self.ignored_events += 1;
                continue;
            }
            self.apply(event)?;
        }
        Ok(self.outcome())
    }

    pub fn outcome(&self) -> ReplayOutcome {
        ReplayOutcome {
            final_state: self.state,
            directives: self.directives.clone(),
            ignored_events: self.ignored_events,
        }
    }
}
