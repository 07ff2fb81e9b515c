export type BrushMode = "paint" | "erase";

export interface BrushState {
  radius: number; // pixels, >= 1
  intensity: number; // [0, 1]; ignored when erasing
  mode: BrushMode;
}

export interface Point {
  x: number;
  y: number;
}

export type JobStatus = "queued" | "running" | "done" | "failed";

export interface JobInfo {
  id: string;
  status: JobStatus;
  progress: number;
  created_at: number;
  completed_at: number | null;
  error: string | null;
  params: Record<string, number>;
}

/** Solver fields the form mirrors, prefilled with the stock defaults. */
export interface SolverParamsForm {
  lam: number;
  gamma: number;
  beta_min: number | null; // null = derive from lam
  beta_max: number;
  kappa: number;
  adam_step: number;
  adam_b1: number;
  adam_b2: number;
  adam_eps: number;
  inner_iters: number;
  inner_rel_tol: number;
}

export const DEFAULT_PARAMS: SolverParamsForm = {
  lam: 0.002,
  gamma: 0.012,
  beta_min: null,
  beta_max: 1e5,
  kappa: 2,
  adam_step: 0.001,
  adam_b1: 0.9,
  adam_b2: 0.999,
  adam_eps: 1e-8,
  inner_iters: 100,
  inner_rel_tol: 1e-6,
};

/** Drop null/NaN entries so the service applies its own defaults. */
export function paramsPayload(form: SolverParamsForm): Record<string, number> {
  const out: Record<string, number> = {};
  for (const [key, value] of Object.entries(form)) {
    if (value !== null && Number.isFinite(value)) {
      out[key] = value;
    }
  }
  return out;
}
