import type { JobInfo } from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly reason: string,
    detail: string,
  ) {
    super(`${reason}: ${detail}`);
  }
}

async function rejectionOf(resp: Response): Promise<ServiceError> {
  let reason = `http_${resp.status}`;
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    reason = body.reason ?? body.detail ?? reason;
    detail = body.detail ?? detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ServiceError(resp.status, reason, detail);
}

export interface PollOptions {
  intervalMs?: number;
  signal?: AbortSignal;
  onProgress?: (fraction: number, job: JobInfo) => void;
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async health(): Promise<boolean> {
    try {
      const resp = await fetch(this.url("/healthz"));
      return resp.ok;
    } catch {
      return false;
    }
  }

  async createJob(
    image: Blob,
    mask: Blob | null,
    params: Record<string, number>,
  ): Promise<string> {
    const form = new FormData();
    form.append("image", image, "image.png");
    if (mask !== null) {
      form.append("mask", mask, "mask.png");
    }
    if (Object.keys(params).length > 0) {
      form.append("params", JSON.stringify(params));
    }
    const resp = await fetch(this.url("/jobs"), { method: "POST", body: form });
    if (!resp.ok) {
      throw await rejectionOf(resp);
    }
    const body = await resp.json();
    return body.id as string;
  }

  async getJob(id: string): Promise<JobInfo> {
    const resp = await fetch(this.url(`/jobs/${id}`));
    if (!resp.ok) {
      throw await rejectionOf(resp);
    }
    return (await resp.json()) as JobInfo;
  }

  async fetchResult(id: string): Promise<Blob> {
    const resp = await fetch(this.url(`/jobs/${id}/result`));
    if (!resp.ok) {
      throw await rejectionOf(resp);
    }
    return await resp.blob();
  }

  /** Poll until done/failed. Aborting the signal stops the poll client-side
   * only; the server job keeps running and is simply abandoned. */
  async pollUntilDone(id: string, options: PollOptions = {}): Promise<JobInfo> {
    const interval = options.intervalMs ?? 250;
    for (;;) {
      if (options.signal?.aborted) {
        throw new DOMException("poll cancelled", "AbortError");
      }
      const job = await this.getJob(id);
      options.onProgress?.(job.progress, job);
      if (job.status === "done" || job.status === "failed") {
        return job;
      }
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
  }
}
