export type Status = "proposed" | "accepted" | "rejected";

export type RelationshipKind = "association" | "aggregation" | "inheritance";

export interface AttributeDoc {
  id: string;
  name: string;
  type: string;
  status: Status;
}

export interface ClassDoc {
  id: string;
  name: string;
  attributes: AttributeDoc[];
  status: Status;
}

export interface EnumDoc {
  id: string;
  name: string;
  literals: string[];
  status: Status;
}

export interface RelationshipDoc {
  id: string;
  kind: RelationshipKind;
  source: string;
  target: string;
  name: string;
  source_mult: string | null;
  target_mult: string | null;
  status: Status;
}

export interface ModelDoc {
  classes: ClassDoc[];
  enums: EnumDoc[];
  relationships: RelationshipDoc[];
}

export interface ModelResponse {
  version: number;
  model: ModelDoc;
}

export interface ProjectInfo {
  id: string;
  name: string;
  description: string;
  version: number;
  created: string;
  updated: string;
}

export interface GenerateConfig {
  overall_mode?: "decomposed" | "baseline";
  class_mode?: "two_turn" | "single_turn";
  rel_mode?: "split" | "combined";
  temp_class?: number;
  temp_assoc?: number;
  temp_inherit?: number;
}

export interface EvaluateResponse {
  metrics: Record<string, Record<string, number>>;
  low_confidence: { generated: string; oracle: string }[];
}
