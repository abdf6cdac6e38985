export type Polarity = "increase" | "decrease" | "neutral";
export type CandidateKind = "variable" | "relation";
export type DecisionChoice = "accept" | "reject";

export interface ProvenanceExample {
  doc: string;
  sent: number;
  text?: string;
}

export interface CandidateItem {
  text: string;
  confidence: number;
  examples: ProvenanceExample[];
}

export interface CandidateBatch {
  batch_id: string;
  iteration: number;
  phase: string;
  kind: CandidateKind;
  status: string;
  items: CandidateItem[];
}

export interface SessionView {
  id: string;
  state: "idle" | "awaiting_labels" | "iterating" | "converged";
  iteration: number;
  variables: number;
  relations: number;
  open_batch: CandidateBatch | null;
  applied?: {
    added_variables: number;
    added_relations: number;
    added_variants: number;
    rejected: number;
  };
}

export interface LabelDecision {
  candidate: string;
  kind: CandidateKind;
  decision: DecisionChoice;
  polarity?: Polarity | null;
  canonical_name?: string | null;
}

export interface DuplicateProposal {
  a: string;
  b: string;
  score: number;
}

export interface MergeDecision {
  a: string;
  b: string;
  confirm: boolean;
  canonical?: string | null;
}

export interface GraphNode {
  name: string;
  is_center: boolean;
  frequency: number;
}

export interface GraphEdge {
  subject: string;
  polarity: Polarity;
  object: string;
  keywords: string[];
}

export interface GraphPayload {
  nodes: GraphNode[];
  edges: GraphEdge[];
}
