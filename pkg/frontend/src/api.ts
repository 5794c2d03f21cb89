// Typed client for the distsel JSON API. The UI never computes statistics:
// every displayed number originates from one of these payloads.

export interface DipResult {
  statistic: number;
  p_value: number;
  n_boot: number;
  sample_size: number;
}

export interface DensityEstimate {
  kernel_points: number[];
  densities: number[];
  pareto_radius: number;
  degenerate: boolean;
}

export interface MdSeries {
  label: string;
  density: DensityEstimate;
  dip: DipResult | null;
  sample_size: number;
}

export interface MdPlot {
  schema: number;
  series: MdSeries[];
  overlay: { x: number[]; density: number[] } | null;
  boundaries: number[];
}

export interface ScanEntry {
  metric: string;
  dip: DipResult | null;
  summary: { n: number; min: number; median: number; max: number } | null;
  plot: MdPlot | null;
  error: string | null;
}

export interface ScanResult {
  schema: number;
  entries: ScanEntry[];
  ranking: string[];
  note: string | null;
}

export interface GmmParams {
  schema?: number;
  weights: number[];
  means: number[];
  sds: number[];
  loglik?: number | null;
  n?: number;
}

export interface Boundaries {
  boundaries: number[];
  posterior_at_boundary: number[];
  pairs: number[][];
  missing_pairs: number[][];
}

export interface GofResult {
  chi2_statistic: number;
  dof: number;
  p_value: number;
  bins: number;
  bin_edges: (number | null)[];
  sample_size: number;
}

export interface QqData {
  empirical: number[];
  model: number[];
  max_abs_deviation: number;
}

export interface ModelPayload {
  schema: number;
  session: string;
  metric: string | null;
  model: GmmParams | null;
  boundaries: Boundaries | null;
  bd: number | null;
  overlay: { x: number[]; density: number[] } | null;
  gof: GofResult | null;
  qq: QqData | null;
  warning: string | null;
}

export interface ClusterCheck {
  cluster: number;
  size: number;
  n_intra: number;
  median: number | null;
  robust_sd: number | null;
  criterion: number | null;
  passed: boolean | null;
  pct_above: number | null;
}

export interface PartitionReport {
  schema: number;
  name: string;
  boundary: number;
  clusters: ClusterCheck[];
  pct_above: number | null;
  overall_pass: boolean | null;
}

export interface EvaluateResponse {
  schema: number;
  session: string;
  reports: PartitionReport[];
  plots: Record<string, MdPlot>;
}

export interface PartitionSpec {
  name: string;
  labels?: number[];
  algorithm?: string;
  k?: number;
  linkage?: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* keep the status text */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string, session?: string): string {
    const suffix = session ? `?session=${encodeURIComponent(session)}` : "";
    return `${this.base}${path}${suffix}`;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchFn(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => asJson<T>(r));
  }

  scan(payload: {
    session?: string;
    data: { values: number[][]; feature_names?: string[]; coordinate_system?: string };
    labels?: number[];
    metrics: string[];
    seed?: number;
    n_boot?: number;
  }): Promise<{ schema: number; session: string; scan: ScanResult }> {
    return this.post("/scan", payload);
  }

  getScan(session: string): Promise<{ session: string; scan: ScanResult }> {
    return this.fetchFn(this.url("/scan", session)).then((r) => asJson(r));
  }

  density(metric: string, session: string): Promise<{ metric: string; plot: MdPlot }> {
    return this.fetchFn(this.url(`/density/${encodeURIComponent(metric)}`, session)).then(
      (r) => asJson(r),
    );
  }

  fit(payload: {
    session: string;
    metric: string;
    m: number;
    restarts?: number;
    seed?: number;
  }): Promise<ModelPayload> {
    return this.post("/gmm/fit", payload);
  }

  putParams(payload: {
    session: string;
    weights: number[];
    means: number[];
    sds: number[];
  }): Promise<ModelPayload> {
    return this.fetchFn(this.url("/gmm/params"), {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    }).then((r) => asJson<ModelPayload>(r));
  }

  getModel(session: string): Promise<ModelPayload> {
    return this.fetchFn(this.url("/gmm", session)).then((r) => asJson(r));
  }

  evaluate(payload: {
    session: string;
    partitions: PartitionSpec[];
  }): Promise<EvaluateResponse> {
    return this.post("/evaluate", payload);
  }

  report(session: string): Promise<Record<string, unknown>> {
    return this.fetchFn(this.url("/report", session)).then((r) => asJson(r));
  }
}

/**
 * Serializes model edits: at most one PUT in flight; edits arriving while a
 * request is pending replace the queued one, and responses from superseded
 * requests are dropped so the latest edit always wins.
 */
export class ModelEditQueue {
  private inFlight = false;
  private queued: { session: string; weights: number[]; means: number[]; sds: number[] } | null =
    null;
  private sequence = 0;

  constructor(
    private readonly client: ApiClient,
    private readonly onResult: (payload: ModelPayload) => void,
    private readonly onError: (error: unknown) => void = () => {},
  ) {}

  submit(edit: { session: string; weights: number[]; means: number[]; sds: number[] }): void {
    this.queued = edit;
    if (!this.inFlight) void this.pump();
  }

  get pending(): boolean {
    return this.inFlight || this.queued !== null;
  }

  private async pump(): Promise<void> {
    while (this.queued !== null) {
      const edit = this.queued;
      this.queued = null;
      this.inFlight = true;
      const ticket = ++this.sequence;
      try {
        const payload = await this.client.putParams(edit);
        // a queued edit means this response is already stale: skip rendering
        if (ticket === this.sequence && this.queued === null) this.onResult(payload);
      } catch (error) {
        if (ticket === this.sequence && this.queued === null) this.onError(error);
      } finally {
        this.inFlight = false;
      }
    }
  }
}
