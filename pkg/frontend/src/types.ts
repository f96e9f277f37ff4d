/** Wire shapes of the annotation service JSON API. */

export interface RelationDescriptor {
  label: string;
  help: string;
  exclusive: boolean;
}

export interface ServiceSchema {
  relations: RelationDescriptor[];
  facets: string[];
  facet_requires: string;
}

export interface PairView {
  pair_id: string;
  caption: string;
  image_url: string;
}

export interface NextPairResponse {
  status: "pair";
  pair: PairView;
  position: number;
  total: number;
  schema: ServiceSchema;
}

export interface NextDoneResponse {
  status: "done";
  completed: number;
  total: number;
}

export type NextResponse = NextPairResponse | NextDoneResponse;

export interface SubmitPayload {
  pair_id: string;
  relations: string[];
  facets: string[];
  comment: string | null;
  timestamp: number;
}

export interface SubmitAck {
  status: "ok";
  duplicate: boolean;
}

export interface ProgressResponse {
  per_annotator: Record<string, { assigned: number; completed: number }>;
  total_assigned: number;
  total_completed: number;
  overlap_completed_both: number;
}

export interface AgreementResponse {
  defined: boolean;
  n_pairs: number;
  mean_kappa: number | null;
  per_label: Record<
    string,
    {
      kappa: number | null;
      p_observed: number;
      p_expected: number;
      degenerate: boolean;
    }
  >;
}
